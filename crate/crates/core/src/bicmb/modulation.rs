use num_complex::Complex64;

use crate::{Error, Result};

/// Square QAM with per-axis Gray labeling and unit average energy.
///
/// Label bit `i = 0` is the most significant. The first half of the label
/// selects the in-phase level, the second half the quadrature level; along
/// each axis consecutive levels differ in one bit. For 16-QAM the levels are
/// `{−3, −1, +1, +3}/√10` labeled `00, 01, 11, 10`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSpec {
    bits: usize,
    points: Vec<Complex64>,
    d_min: f64,
    /// `half_sets[i][b]`: labels whose bit `i` equals `b`.
    half_sets: Vec<[Vec<usize>; 2]>,
}

impl ModulationSpec {
    pub fn square_qam(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if !order.is_power_of_two() || !bits.is_multiple_of(2) || bits == 0 {
            return Err(Error::Config(format!("square QAM needs an even power of two order, got {order}")));
        }
        let axis_bits = bits / 2;
        let side = 1usize << axis_bits;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt().recip();
        let level = |gray: usize| {
            let mut idx = gray;
            let mut shift = gray >> 1;
            while shift != 0 {
                idx ^= shift;
                shift >>= 1;
            }
            (2 * idx) as f64 - (side - 1) as f64
        };
        let points = (0..order)
            .map(|label| {
                let i_lbl = label >> axis_bits;
                let q_lbl = label & (side - 1);
                Complex64::new(level(i_lbl), level(q_lbl)) * scale
            })
            .collect();
        let half_sets = (0..bits)
            .map(|i| {
                let shift = bits - 1 - i;
                let zero = (0..order).filter(|l| (l >> shift) & 1 == 0).collect();
                let one = (0..order).filter(|l| (l >> shift) & 1 == 1).collect();
                [zero, one]
            })
            .collect();
        Ok(Self { bits, points, d_min: 2.0 * scale, half_sets })
    }

    pub fn qam16() -> Self {
        Self::square_qam(16).expect("16 is a square QAM order")
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn half_set(&self, bit: usize, value: u8) -> &[usize] {
        &self.half_sets[bit][(value & 1) as usize]
    }

    /// Bit costs `min_{x ∈ χ_b^i} |y − amp·x|²` for every position `i`,
    /// written to `out[i] = [cost for b = 0, cost for b = 1]`.
    pub fn bit_metrics_into(&self, y: Complex64, amp: f64, out: &mut [[f64; 2]]) {
        debug_assert_eq!(out.len(), self.bits);
        out.iter_mut().for_each(|c| *c = [f64::INFINITY; 2]);
        for (label, x) in self.points.iter().enumerate() {
            let dist = (y - x * amp).norm_sqr();
            for (i, cost) in out.iter_mut().enumerate() {
                let b = (label >> (self.bits - 1 - i)) & 1;
                if dist < cost[b] {
                    cost[b] = dist;
                }
            }
        }
    }

    /// The mapping as text: one row per label with its bits, I and Q.
    pub fn table(&self) -> String {
        let mut s = String::from("label i q\n");
        for (label, x) in self.points.iter().enumerate() {
            s.push_str(&format!("{label:0w$b} {:+.12} {:+.12}\n", x.re, x.im, w = self.bits));
        }
        s
    }
}

/// Per-position cost pairs for the received scalar `y` over gain `sigma·gamma`.
pub fn bit_metrics(modulation: &ModulationSpec, y: Complex64, sigma: f64, gamma: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; modulation.bits_per_symbol()];
    modulation.bit_metrics_into(y, sigma * gamma, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_energy_and_dmin() {
        let md = ModulationSpec::qam16();
        let e: f64 = md.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert!((e - 1.0).abs() < 1e-12);
        assert!((md.d_min() - 2.0 / 10f64.sqrt()).abs() < 1e-15);
        let mut min = f64::INFINITY;
        for a in md.points() {
            for b in md.points() {
                if a != b {
                    min = min.min((a - b).norm());
                }
            }
        }
        assert!((min - md.d_min()).abs() < 1e-12);
    }

    #[test]
    fn axis_gray_levels() {
        let md = ModulationSpec::qam16();
        let s = 10f64.sqrt();
        assert!((md.point(0b0000) - Complex64::new(-3.0, -3.0) / s).norm() < 1e-12);
        assert!((md.point(0b0111) - Complex64::new(-1.0, 1.0) / s).norm() < 1e-12);
        assert!((md.point(0b1110) - Complex64::new(1.0, 3.0) / s).norm() < 1e-12);
    }

    #[test]
    fn half_sets_partition() {
        let md = ModulationSpec::qam16();
        for i in 0..4 {
            let (z, o) = (md.half_set(i, 0), md.half_set(i, 1));
            assert_eq!(z.len(), 8);
            assert_eq!(o.len(), 8);
            let mut all: Vec<usize> = z.iter().chain(o).copied().collect();
            all.sort();
            assert_eq!(all, (0..16).collect::<Vec<_>>());
        }
    }

    #[test]
    fn nearest_neighbours_differ_in_one_bit() {
        for order in [4, 16, 64] {
            let md = ModulationSpec::square_qam(order).unwrap();
            for a in 0..order {
                for b in 0..order {
                    let d = (md.point(a) - md.point(b)).norm();
                    if a != b && (d - md.d_min()).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "{order}: {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn transmitted_point_has_zero_cost() {
        let md = ModulationSpec::qam16();
        for label in 0..16 {
            let m = bit_metrics(&md, md.point(label) * 1.7 * 0.9, 1.7, 0.9);
            for (i, c) in m.iter().enumerate() {
                let b = (label >> (3 - i)) & 1;
                assert!(c[b].abs() < 1e-24);
                assert!(c[1 - b] > 0.0);
            }
        }
    }

    #[test]
    fn dead_channel_is_uninformative() {
        let md = ModulationSpec::qam16();
        let y = Complex64::new(0.3, -1.1);
        for c in bit_metrics(&md, y, 0.0, 1.0) {
            assert_eq!(c[0], y.norm_sqr());
            assert_eq!(c[1], y.norm_sqr());
        }
    }

    #[test]
    fn rejects_non_square_orders() {
        assert!(ModulationSpec::square_qam(8).is_err());
        assert!(ModulationSpec::square_qam(1).is_err());
    }

    #[test]
    fn table_has_a_row_per_point() {
        let t = ModulationSpec::qam16().table();
        assert_eq!(t.lines().count(), 17);
        assert!(t.lines().nth(1).unwrap().starts_with("0000 "));
    }
}
