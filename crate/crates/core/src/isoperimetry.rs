//! The isoperimetric bound, deficits, and the half-spaces that attain it.

use crate::error::{Error, Result};
use crate::gaussline::std_normal_quantile;
use crate::linalg::{Direction, SpdMatrix};
use crate::measures::{mass, perimeter, MeasureResult, QuadratureConfig};
use crate::sets::{HalfSpaceSet, SetRegion};
use std::f64::consts::PI;

fn check_mass(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::OutOfRange { value: m, range: "[0, 1]" });
    }
    Ok(())
}

/// e^{−φ^{-1}(m)²/2}·d_min; zero at m ∈ {0, 1}.
pub fn iso_bound(a: &SpdMatrix, m: f64) -> Result<f64> {
    check_mass(m)?;
    if m == 0.0 || m == 1.0 {
        return Ok(0.0);
    }
    let q = std_normal_quantile(m)?;
    Ok((-0.5 * q * q).exp() * a.d_min())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoResult {
    pub mass: MeasureResult,
    pub perimeter: MeasureResult,
    pub bound: f64,
    /// perimeter − bound.
    pub deficit: f64,
    /// 10× the propagated error of the deficit.
    pub tolerance: f64,
}

impl IsoResult {
    pub fn holds(&self) -> bool {
        self.deficit >= -self.tolerance
    }
}

pub fn iso_check(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<IsoResult> {
    let m = mass(a, e, cfg)?;
    let p = perimeter(a, e, cfg)?;
    let mv = m.value.clamp(0.0, 1.0);
    let bound = iso_bound(a, mv)?;
    // d(bound)/dm = −φ^{-1}(m)·√(2π)·d_min
    let slope = if mv > 0.0 && mv < 1.0 {
        std_normal_quantile(mv)?.abs() * (2.0 * PI).sqrt() * a.d_min()
    } else {
        0.0
    };
    Ok(IsoResult {
        mass: m,
        perimeter: p,
        bound,
        deficit: p.value - bound,
        tolerance: 10.0 * (p.error_estimate + slope * m.error_estimate) + 1e-12,
    })
}

/// H(ω, φ^{-1}(m)/d_min) with ω the eigenvector of the smallest eigenvalue,
/// signed so its largest-magnitude component is positive.
pub fn extremal_halfspace(a: &SpdMatrix, m: f64) -> Result<HalfSpaceSet> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::OutOfRange { value: m, range: "(0, 1)" });
    }
    let omega = Direction::new(a.eigenvectors().column(0))?;
    Ok(HalfSpaceSet::new(omega, std_normal_quantile(m)? / a.d_min()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{halfspace_mass, halfspace_perimeter};
    use crate::sets::BoxSet;

    fn diag(d: &[f64]) -> SpdMatrix {
        SpdMatrix::new(&crate::linalg::Matrix::diag(d)).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert!((iso_bound(&SpdMatrix::identity(2), 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((iso_bound(&diag(&[4.0, 1.0]), 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(iso_bound(&diag(&[4.0, 1.0]), 0.0).unwrap(), 0.0);
        assert_eq!(iso_bound(&diag(&[4.0, 1.0]), 1.0).unwrap(), 0.0);
        assert!(iso_bound(&SpdMatrix::identity(2), 1.5).is_err());
    }

    #[test]
    fn extremal_examples() {
        let h = extremal_halfspace(&SpdMatrix::identity(2), 0.5).unwrap();
        assert_eq!(h.t, 0.0);
        let d = diag(&[4.0, 1.0]);
        let h = extremal_halfspace(&d, 0.8).unwrap();
        assert_eq!(h.omega.as_slice(), &[0.0, 1.0]);
        let q = std_normal_quantile(0.8).unwrap();
        assert!((h.t - q).abs() < 1e-15);
        assert!((halfspace_perimeter(&d, &h).unwrap().value - (-0.5 * q * q).exp()).abs() < 1e-12);
        let one = diag(&[3.0]);
        let h = extremal_halfspace(&one, 0.3).unwrap();
        assert!((h.t - std_normal_quantile(0.3).unwrap() / 3f64.sqrt()).abs() < 1e-15);
        assert!(h.omega.as_slice()[0] > 0.0);
    }

    #[test]
    fn extremal_sets_attain_the_bound() {
        let a = SpdMatrix::from_rows(&[vec![2.0, 0.6, 0.1], vec![0.6, 1.0, -0.3], vec![0.1, -0.3, 1.7]]).unwrap();
        let cfg = QuadratureConfig::default();
        for m in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let h = extremal_halfspace(&a, m).unwrap();
            assert!((halfspace_mass(&a, &h).unwrap().value - m).abs() < 1e-12);
            assert!((halfspace_perimeter(&a, &h).unwrap().value - iso_bound(&a, m).unwrap()).abs() < 1e-12);
            let r = iso_check(&a, &SetRegion::HalfSpace(h), &cfg).unwrap();
            assert!(r.deficit.abs() < 1e-9);
        }
    }

    #[test]
    fn strict_deficits() {
        let cfg = QuadratureConfig::default();
        let sq = SetRegion::Box(BoxSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let r = iso_check(&SpdMatrix::identity(2), &sq, &cfg).unwrap();
        assert!(r.deficit > 0.0 && r.holds());
        let d = diag(&[4.0, 1.0]);
        let off = SetRegion::HalfSpace(HalfSpaceSet::new(Direction::new(vec![1.0, 1.0]).unwrap(), 0.0));
        assert!(iso_check(&d, &off, &cfg).unwrap().deficit > 1e-3);
    }

    #[test]
    fn deficit_grows_with_angle_from_eigenspace() {
        // consequence of the closed forms, not of the inequality itself
        let d = diag(&[4.0, 1.0]);
        let mut last = -1.0;
        for i in 1..=32 {
            let th = i as f64 / 32.0 * PI / 2.0;
            let h = HalfSpaceSet::new(Direction::new(vec![th.sin(), th.cos()]).unwrap(), 0.0);
            let def = halfspace_perimeter(&d, &h).unwrap().value - iso_bound(&d, 0.5).unwrap();
            assert!(def > last);
            last = def;
        }
    }
}
