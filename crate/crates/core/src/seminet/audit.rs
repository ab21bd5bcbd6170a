use crate::error::{Error, Result};
use crate::par::Exec;

use super::nets::uncovered_point;
use super::space::{BilinearSystem, SemimetricSpace};

/// A verified `eps`-net of `(A, d_A)` used to approximate `d_B`.
#[derive(Debug, Clone)]
pub struct NetAudit<'a> {
    system: &'a BilinearSystem,
    d_b: SemimetricSpace,
    net: Vec<usize>,
    eps: f64,
}

/// One approximation of `d_B(b1, b2)` from the net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetApprox {
    /// `max_{y in net} |h(y, b1) - h(y, b2)|`.
    pub approx: f64,
    pub d_b: f64,
    pub eps: f64,
}

impl NetApprox {
    /// `d_B - approx`, which must lie in `[0, 2 eps]`.
    pub fn error(&self) -> f64 {
        self.d_b - self.approx
    }

    /// Slack of the weaker side of `approx <= d_B <= approx + 2 eps`.
    pub fn slack(&self) -> f64 {
        (self.d_b - self.approx).min(self.approx + 2.0 * self.eps - self.d_b)
    }
}

impl<'a> NetAudit<'a> {
    /// Checks that every point of `A` is within `eps` of the net (`eps = 0`
    /// is allowed); otherwise reports an uncovered witness.
    pub fn new(
        system: &'a BilinearSystem,
        d_a: &SemimetricSpace,
        net: Vec<usize>,
        eps: f64,
    ) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be nonnegative, got {eps}"
            )));
        }
        if let Some(&y) = net.iter().find(|&&y| y >= system.rows()) {
            return Err(Error::InvalidParameter(format!(
                "net point {y} is not in A"
            )));
        }
        if let Some(a) = uncovered_point(d_a, &net, eps, Exec::default()) {
            return Err(Error::PreconditionViolation(format!(
                "point {a} of A is farther than {eps} from the net"
            )));
        }
        let d_b =
            SemimetricSpace::from_fn(system.cols(), Exec::default(), |i, j| system.d_b(i, j))?;
        Ok(Self {
            system,
            d_b,
            net,
            eps,
        })
    }

    pub fn approx(&self, b1: usize, b2: usize) -> NetApprox {
        let approx = self
            .net
            .iter()
            .map(|&y| (self.system.h(y, b1) - self.system.h(y, b2)).norm())
            .fold(0.0, f64::max);
        NetApprox {
            approx,
            d_b: self.d_b.table()[b1 * self.system.cols() + b2],
            eps: self.eps,
        }
    }

    /// The smallest slack over all pairs of `B`, with the pair attaining it.
    pub fn worst(&self) -> (f64, usize, usize) {
        let l = self.system.cols();
        let rows = Exec::default().map(l, |b1| {
            (0..l).map(|b2| (self.approx(b1, b2).slack(), b1, b2)).fold(
                (f64::INFINITY, b1, b1),
                |a, b| if b.0 < a.0 { b } else { a },
            )
        });
        rows.into_iter()
            .fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// The largest `d_B - approx` over all pairs.
    pub fn max_error(&self) -> f64 {
        let l = self.system.cols();
        let rows = Exec::default().map(l, |b1| {
            (0..l)
                .map(|b2| self.approx(b1, b2).error())
                .fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Approximate `d_B(b1, b2)` from an `eps`-net of `(A, d_A)` and check
/// `approx <= d_B <= approx + 2 eps`.
pub fn net_db_approx(
    s: &BilinearSystem,
    d_a: &SemimetricSpace,
    net: &[usize],
    eps: f64,
    b1: usize,
    b2: usize,
) -> Result<NetApprox> {
    if b1 >= s.cols() || b2 >= s.cols() {
        return Err(Error::InvalidParameter("point of B out of range".into()));
    }
    let audit = NetAudit::new(s, d_a, net.to_vec(), eps)?;
    let r = audit.approx(b1, b2);
    if r.slack() < 0.0 {
        return Err(Error::CheckFailed(format!(
            "net bound broken for ({b1}, {b2}): approx {}, d_B {}, eps {eps}",
            r.approx, r.d_b
        )));
    }
    Ok(r)
}
