//! Independent reference values for the test suites.

/// Double-double number `hi + lo`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    pub fn div_f64(self, d: f64) -> Dd {
        let q = self.hi / d;
        let (p, e) = two_prod(q, d);
        let r = (self.hi - p - e + self.lo) / d;
        let (hi, lo) = two_sum(q, r);
        Dd { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `I_n(x)` for `n ∈ {0, 1}` by the power series in double-double arithmetic.
pub fn bessel_series_dd(order: u32, x: f64) -> f64 {
    let (sq, sq_err) = two_prod(x, x);
    let y = Dd { hi: sq, lo: sq_err }.mul(Dd::from(0.25));
    let mut term = if order == 0 {
        Dd::from(1.0)
    } else {
        Dd::from(0.5 * x)
    };
    let mut sum = term;
    let mut k = 1.0;
    while term.hi > 1e-34 * sum.hi {
        term = term.mul(y).div_f64(k * (k + order as f64));
        sum = sum.add(term);
        k += 1.0;
    }
    sum.value()
}
