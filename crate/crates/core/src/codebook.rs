use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BeamSelection, ComplexMatrix};

/// Constant-modulus DFT codebook, `M x N_vec`.
///
/// Entry `(m, u)` (zero-based) is `exp(-j 2 pi m u / N_vec)`. Columns are not
/// normalised; the `sqrt(P/M)` power split is applied in the SINR.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    w: ComplexMatrix,
}

impl Codebook {
    pub fn antennas(&self) -> usize {
        self.w.rows()
    }

    pub fn size(&self) -> usize {
        self.w.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    /// `M x N` precoder whose column `i` is codebook column `sel[i]`.
    pub fn materialize(&self, sel: &BeamSelection) -> Result<ComplexMatrix> {
        let sel = BeamSelection::new(sel.indices().to_vec(), self.size())?;
        Ok(ComplexMatrix::from_fn(self.antennas(), sel.len(), |m, i| {
            self.w.get(m, sel.column(i))
        }))
    }
}

pub fn build_dft_codebook(antennas: usize, codebook_size: usize) -> Result<Codebook> {
    if codebook_size < antennas || codebook_size == 0 {
        return Err(Error::CodebookTooSmall {
            antennas,
            codebook_size,
        });
    }
    let w = ComplexMatrix::from_fn(antennas, codebook_size, |m, u| {
        // Reduce the phase index first so large products keep full precision.
        let phase = ((m * u) % codebook_size) as f64 / codebook_size as f64;
        Complex64::from_polar(1.0, -2.0 * PI * phase)
    });
    Ok(Codebook { w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(ix: &[usize], n_vec: usize) -> BeamSelection {
        BeamSelection::new(ix.to_vec(), n_vec).unwrap()
    }

    #[test]
    fn first_row_and_column_are_ones() {
        let cb = build_dft_codebook(8, 16).unwrap();
        for u in 0..16 {
            assert_eq!(cb.matrix().get(0, u), Complex64::new(1.0, 0.0));
        }
        for m in 0..8 {
            assert_eq!(cb.matrix().get(m, 0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn direct_entry_value() {
        let cb = build_dft_codebook(2, 4).unwrap();
        assert!((cb.matrix().get(1, 1) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn square_dft_columns_are_orthogonal() {
        let cb = build_dft_codebook(4, 4).unwrap();
        let w = cb.matrix();
        for u in 0..4 {
            for v in 0..4 {
                let ip: Complex64 = (0..4).map(|m| w.get(m, u).conj() * w.get(m, v)).sum();
                if u == v {
                    assert!((ip.re - 4.0).abs() < 1e-12);
                } else {
                    assert!(ip.norm() < 1e-12, "<w{},w{}> = {}", u, v, ip);
                }
            }
        }
    }

    #[test]
    fn constant_modulus() {
        let cb = build_dft_codebook(32, 128).unwrap();
        for z in cb.matrix().as_slice() {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_codebook() {
        assert!(matches!(build_dft_codebook(8, 4), Err(Error::CodebookTooSmall { .. })));
    }

    #[test]
    fn identity_selection_gives_full_dft() {
        let cb = build_dft_codebook(2, 2).unwrap();
        assert_eq!(cb.materialize(&sel(&[1, 2], 2)).unwrap(), *cb.matrix());
    }

    #[test]
    fn materialize_is_order_sensitive() {
        let cb = build_dft_codebook(2, 4).unwrap();
        let a = cb.materialize(&sel(&[1, 3], 4)).unwrap();
        let b = cb.materialize(&sel(&[3, 1], 4)).unwrap();
        assert_ne!(a, b);
        for m in 0..2 {
            assert_eq!(a.get(m, 0), b.get(m, 1));
            assert_eq!(a.get(m, 1), b.get(m, 0));
        }
    }

    #[test]
    fn materialize_rejects_out_of_range() {
        let cb = build_dft_codebook(2, 4).unwrap();
        let big = BeamSelection::new(vec![1, 7], 8).unwrap();
        assert!(matches!(cb.materialize(&big), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn materialized_column_depends_only_on_its_index() {
        let cb = build_dft_codebook(4, 16).unwrap();
        let a = cb.materialize(&sel(&[5, 2, 9], 16)).unwrap();
        let b = cb.materialize(&sel(&[5, 11, 16], 16)).unwrap();
        for m in 0..4 {
            assert_eq!(a.get(m, 0), b.get(m, 0));
            assert_eq!(a.get(m, 0), cb.matrix().get(m, 4));
            assert!((a.get(m, 1).norm() - 1.0).abs() < 1e-14);
        }
    }
}
