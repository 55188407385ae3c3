//! Overlap lists and orientational coefficient tables for the stimulated
//! emission parts of the pump-probe and pump-probe-difference signals.

use num_complex::Complex64 as C64;

use super::pathway::PathwaySpec;
use crate::error::{Error, Result};

/// The eight overlaps of the parallel-minus-perpendicular pump-probe
/// combination, as `(bra, ket)`.
pub const PP_OVERLAPS: [(&str, &str); 8] = [
    ("{a(10)}1", "{c(10)c(01)a(10)}1"),
    ("{a(1′0)}1′", "{c(1′0)c(01′)a(1′0)}1′"),
    ("{a(1′0)}1", "{c(10)c(01)a(1′0)}1"),
    ("{a(1′0)}1′", "{c(1′0)c(01)a(10)}1′"),
    ("{a(1′0)}1", "{c(10)c(01′)a(10)}1"),
    ("{a(10)}1′", "{c(1′0)c(01)a(1′0)}1′"),
    ("{a(10)}1", "{c(10)c(01′)a(1′0)}1"),
    ("{a(10)}1′", "{c(1′0)c(01′)a(10)}1′"),
];

/// The eight overlaps of the pump-probe-difference combinations. The first
/// four carry the control on the ket, the last four on the bra.
pub const PPD_OVERLAPS: [(&str, &str); 8] = [
    ("{a(10)}1", "{c(10)c(01)a(10)p(01)p(10)}1"),
    ("{a(1′0)}1′", "{c(1′0)c(01)a(10)p(01)p(10)}1′"),
    ("{a(1′0)}1′", "{c(1′0)c(01)a(10)p(01′)p(1′0)}1′"),
    ("{a(10)}1", "{c(10)c(01)a(10)p(01′)p(1′0)}1"),
    ("{a(10)p(01)p(10)}1", "{c(10)c(01)a(10)}1"),
    ("{a(1′0)p(01)p(10)}1′", "{c(1′0)c(01)a(10)}1′"),
    ("{a(1′0)p(01′)p(1′0)}1′", "{c(1′0)c(01)a(10)}1′"),
    ("{a(10)p(01′)p(1′0)}1", "{c(10)c(01)a(10)}1"),
];

/// `scale · Re Σ coefficient · overlap[index]`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Combination {
    pub scale: f64,
    pub terms: &'static [(f64, usize)],
}

impl Combination {
    pub fn evaluate(&self, values: &[C64]) -> f64 {
        let sum: C64 = self.terms.iter().map(|&(c, i)| values[i] * c).sum();
        self.scale * sum.re
    }
}

/// Numerator (parallel minus perpendicular) and denominator (parallel plus
/// twice perpendicular) of one anisotropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientationTable {
    pub numerator: Combination,
    pub denominator: Combination,
}

pub const PP_TABLE: OrientationTable = OrientationTable {
    numerator: Combination {
        scale: 1.0 / 30.0,
        terms: &[(4.0, 0), (4.0, 1), (-2.0, 2), (3.0, 3), (3.0, 4), (3.0, 5), (3.0, 6), (-2.0, 7)],
    },
    denominator: Combination { scale: 1.0 / 3.0, terms: &[(1.0, 0), (1.0, 2), (1.0, 7), (1.0, 1)] },
};

/// Equal-energy form of [`PP_TABLE`], folding each overlap onto its
/// relabeled partner.
pub const PP_HALVED_TABLE: OrientationTable = OrientationTable {
    numerator: Combination { scale: 2.0 / 30.0, terms: &[(4.0, 0), (-2.0, 2), (3.0, 3), (3.0, 4)] },
    denominator: Combination { scale: 2.0 / 3.0, terms: &[(1.0, 0), (1.0, 2)] },
};

pub const PPD_TABLE: OrientationTable = OrientationTable {
    numerator: Combination {
        scale: 2.0 / 30.0,
        terms: &[(2.0, 3), (1.0, 1), (1.0, 2), (2.0, 7), (1.0, 5), (1.0, 6)],
    },
    denominator: Combination {
        scale: 2.0 / 105.0,
        terms: &[(9.0, 0), (-1.0, 1), (-1.0, 2), (13.0, 3), (9.0, 4), (-1.0, 5), (-1.0, 6), (13.0, 7)],
    },
};

/// Evaluated overlaps, one per `(bra, ket)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapTable {
    pairs: Vec<(PathwaySpec, PathwaySpec)>,
    values: Vec<C64>,
}

impl OverlapTable {
    pub fn new(pairs: Vec<(PathwaySpec, PathwaySpec)>, values: Vec<C64>) -> Result<Self> {
        if pairs.len() != values.len() {
            return Err(Error::invalid("values", format!("{} values for {} overlaps", values.len(), pairs.len())));
        }
        Ok(OverlapTable { pairs, values })
    }

    /// Table with the given values attached to `pairs` written in brace
    /// notation.
    pub fn from_notation(pairs: &[(&str, &str)], values: Vec<C64>) -> Result<Self> {
        OverlapTable::new(parse_pairs(pairs)?, values)
    }

    pub fn pairs(&self) -> &[(PathwaySpec, PathwaySpec)] {
        &self.pairs
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Numerator, denominator and their ratio. The ratio is refused when the
    /// denominator is below `floor · max|overlap|`.
    pub fn anisotropy(&self, table: &OrientationTable, floor: f64) -> Result<Signal> {
        let numerator = table.numerator.evaluate(&self.values);
        let denominator = table.denominator.evaluate(&self.values);
        let limit = floor * self.max_abs();
        if !(denominator.abs() > limit) {
            return Err(Error::DegenerateDenominator { value: denominator, floor: limit });
        }
        Ok(Signal { numerator, denominator, anisotropy: numerator / denominator })
    }
}

pub(crate) fn parse_pairs(pairs: &[(&str, &str)]) -> Result<Vec<(PathwaySpec, PathwaySpec)>> {
    pairs.iter().map(|(b, k)| Ok((b.parse()?, k.parse()?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Signal {
    pub numerator: f64,
    pub denominator: f64,
    pub anisotropy: f64,
}

/// `Re X₄ / Re X₁` of the pump-probe overlaps; the only delay-zero
/// departure from 0.4.
pub fn pp_ratio_term(values: &[C64]) -> f64 {
    values[3].re / values[0].re
}

/// Zero-delay pump-probe anisotropy from its two surviving overlaps.
pub fn pp_zero_delay_closed_form(values: &[C64]) -> f64 {
    0.4 + 0.3 * pp_ratio_term(values)
}

/// `Re(Z₁ + Z₅) / Re(Y₁ + Y₄)`: control through site 1 over control through
/// site 1′.
pub fn ppd_ratio_term(values: &[C64]) -> f64 {
    (values[0] + values[4]).re / (values[3] + values[7]).re
}

/// Zero-delay pump-probe-difference anisotropy `7 / (13 + 9·ratio)`.
pub fn ppd_zero_delay_closed_form(values: &[C64]) -> f64 {
    7.0 / (13.0 + 9.0 * ppd_ratio_term(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: f64) -> Vec<C64> {
        vec![C64::new(x, 0.3); 8]
    }

    #[test]
    fn equal_overlaps_give_pp_limit() {
        let t = OverlapTable::from_notation(&PP_OVERLAPS, uniform(1.7)).unwrap();
        let s = t.anisotropy(&PP_TABLE, 1e-12).unwrap();
        assert!((s.numerator - 16.0 * 1.7 / 30.0).abs() < 1e-15);
        assert!((s.denominator - 4.0 * 1.7 / 3.0).abs() < 1e-15);
        assert!((s.anisotropy - 0.4).abs() < 1e-14);
    }

    #[test]
    fn equal_overlaps_give_ppd_limit() {
        let t = OverlapTable::from_notation(&PPD_OVERLAPS, uniform(0.9)).unwrap();
        let s = t.anisotropy(&PPD_TABLE, 1e-12).unwrap();
        assert!((s.anisotropy - 0.7).abs() < 1e-14);
    }

    #[test]
    fn zero_transfer_with_equal_cross_overlap_gives_point_seven() {
        let mut v = vec![C64::new(0.0, 0.0); 8];
        for i in [0, 1, 3, 6] {
            v[i] = C64::new(2.0, 0.0);
        }
        let t = OverlapTable::from_notation(&PP_OVERLAPS, v.clone()).unwrap();
        assert!((t.anisotropy(&PP_TABLE, 1e-12).unwrap().anisotropy - 0.7).abs() < 1e-15);
        assert!((pp_zero_delay_closed_form(&v) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ppd_closed_form_limit() {
        let mut v = vec![C64::new(0.0, 0.0); 8];
        for i in [0, 3, 4, 7] {
            v[i] = C64::new(1.0, 0.0);
        }
        let t = OverlapTable::from_notation(&PPD_OVERLAPS, v.clone()).unwrap();
        let r = t.anisotropy(&PPD_TABLE, 1e-12).unwrap().anisotropy;
        assert!((r - 7.0 / 22.0).abs() < 1e-15);
        assert!((ppd_zero_delay_closed_form(&v) - r).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator_is_an_error() {
        let v = vec![C64::new(0.0, 1.0); 8];
        let t = OverlapTable::from_notation(&PP_OVERLAPS, v).unwrap();
        assert!(matches!(t.anisotropy(&PP_TABLE, 1e-12), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn every_overlap_pairs_equal_projections() {
        for pairs in [&PP_OVERLAPS, &PPD_OVERLAPS] {
            for (b, k) in parse_pairs(pairs).unwrap() {
                assert_eq!(b.projection(), k.projection());
            }
        }
    }

    #[test]
    fn value_count_is_checked() {
        assert!(OverlapTable::from_notation(&PP_OVERLAPS, vec![C64::new(1.0, 0.0); 3]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn equal_overlaps_give_the_limits(re in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64], im in -1e3..1e3f64) {
                let v = vec![C64::new(re, im); 8];
                let pp = OverlapTable::from_notation(&PP_OVERLAPS, v.clone()).unwrap();
                let ppd = OverlapTable::from_notation(&PPD_OVERLAPS, v).unwrap();
                prop_assert!((pp.anisotropy(&PP_TABLE, 0.0).unwrap().anisotropy - 0.4).abs() < 1e-14);
                prop_assert!((pp.anisotropy(&PP_HALVED_TABLE, 0.0).unwrap().anisotropy - 0.4).abs() < 1e-14);
                prop_assert!((ppd.anisotropy(&PPD_TABLE, 0.0).unwrap().anisotropy - 0.7).abs() < 1e-14);
            }

            #[test]
            fn anisotropy_is_scale_free(values in proptest::collection::vec((0.1..2.0f64, -1.0..1.0f64), 8), scale in 1e-6..1e6f64) {
                let v: Vec<C64> = values.iter().map(|&(a, b)| C64::new(a, b)).collect();
                let w: Vec<C64> = v.iter().map(|z| z * scale).collect();
                let a = OverlapTable::from_notation(&PP_OVERLAPS, v).unwrap().anisotropy(&PP_TABLE, 0.0).unwrap().anisotropy;
                let b = OverlapTable::from_notation(&PP_OVERLAPS, w).unwrap().anisotropy(&PP_TABLE, 0.0).unwrap().anisotropy;
                prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
            }
        }
    }
}
