//! Finite sets of nonnegative integer matrices and their automaton
//! counterparts: mortality corresponds to incompleteness, ergodicity to
//! synchronisation, irreducibility to strong connectivity.
//!
//! All decisions route through the positivity pattern (the associated NFA);
//! actual integer products are computed only to verify returned witnesses,
//! with saturating arithmetic and an explicit overflow flag so growth is
//! never silently wrapped.

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::Error;
use crate::nfa::{Nfa, Word};
use crate::oracles;

/// A square matrix of nonnegative integers, row major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    dim: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Matrix {
        Matrix {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Matrix {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Matrix, Error> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::input("a matrix needs at least one row"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::input(format!(
                    "matrix is not square: {dim} rows but a row of length {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.dim + col]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Index of a column whose entries are all strictly positive, if any.
    pub fn positive_column(&self) -> Option<usize> {
        (0..self.dim).find(|&j| (0..self.dim).all(|i| self.get(i, j) > 0))
    }

    /// Saturating product; the flag reports whether any entry saturated.
    /// Saturation pins entries at `u64::MAX`, so positivity (and hence the
    /// zero-matrix test) stays exact.
    pub fn saturating_mul(&self, other: &Matrix) -> (Matrix, bool) {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = Matrix::zeros(dim);
        let mut saturated = false;
        for i in 0..dim {
            for k in 0..dim {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..dim {
                    let b = other.get(k, j);
                    if b == 0 {
                        continue;
                    }
                    let term = a.checked_mul(b).unwrap_or_else(|| {
                        saturated = true;
                        u64::MAX
                    });
                    let cell = &mut out.data[i * dim + j];
                    *cell = cell.checked_add(term).unwrap_or_else(|| {
                        saturated = true;
                        u64::MAX
                    });
                }
            }
        }
        (out, saturated)
    }

    fn rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }
}

/// A nonempty set of equally sized square nonnegative matrices.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "WireMatrixSet", into = "WireMatrixSet")]
pub struct MatrixSet {
    dim: usize,
    matrices: Vec<Matrix>,
}

impl MatrixSet {
    pub fn new(matrices: Vec<Matrix>) -> Result<MatrixSet, Error> {
        let dim = match matrices.first() {
            Some(m) => m.dim(),
            None => return Err(Error::input("a matrix set needs at least one matrix")),
        };
        if let Some(bad) = matrices.iter().find(|m| m.dim() != dim) {
            return Err(Error::input(format!(
                "matrix dimensions differ: {dim} vs {}",
                bad.dim()
            )));
        }
        Ok(MatrixSet { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_matrices(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, index: usize) -> &Matrix {
        &self.matrices[index]
    }

    /// Product of the matrices selected by `word`, left to right. The empty
    /// word yields the identity.
    pub fn product(&self, word: &Word) -> Result<(Matrix, bool), Error> {
        let mut out = Matrix::identity(self.dim);
        let mut saturated = false;
        for &x in word.letters() {
            if x >= self.matrices.len() {
                return Err(Error::input(format!(
                    "letter index {x} outside matrix range 0..{}",
                    self.matrices.len()
                )));
            }
            let (next, sat) = out.saturating_mul(&self.matrices[x]);
            out = next;
            saturated |= sat;
        }
        Ok((out, saturated))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("matrix set serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<MatrixSet, Error> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("matrix JSON: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct WireMatrixSet {
    dim: usize,
    matrices: Vec<Vec<Vec<u64>>>,
}

impl From<MatrixSet> for WireMatrixSet {
    fn from(ms: MatrixSet) -> WireMatrixSet {
        WireMatrixSet {
            dim: ms.dim,
            matrices: ms.matrices.iter().map(Matrix::rows).collect(),
        }
    }
}

impl TryFrom<WireMatrixSet> for MatrixSet {
    type Error = Error;

    fn try_from(wire: WireMatrixSet) -> Result<MatrixSet, Error> {
        let matrices = wire
            .matrices
            .into_iter()
            .map(Matrix::from_rows)
            .collect::<Result<Vec<_>, _>>()?;
        let ms = MatrixSet::new(matrices)?;
        if ms.dim != wire.dim {
            return Err(Error::input(format!(
                "header says dimension {}, matrices have {}",
                wire.dim, ms.dim
            )));
        }
        Ok(ms)
    }
}

/// The NFA whose transition (i, k, j) exists iff entry (i, j) of the k-th
/// matrix is strictly positive.
pub fn to_nfa(ms: &MatrixSet) -> Nfa {
    let mut nfa = Nfa::new(ms.dim(), ms.n_matrices()).expect("dimensions positive");
    for (k, m) in ms.matrices.iter().enumerate() {
        for i in 0..ms.dim() {
            for j in 0..ms.dim() {
                if m.get(i, j) > 0 {
                    nfa.add_transition(i, k, j).expect("indices in range");
                }
            }
        }
    }
    nfa
}

/// The 0/1 matrix set of an automaton; `to_nfa` of the result gives the
/// automaton back.
pub fn from_nfa(nfa: &Nfa) -> MatrixSet {
    let dim = nfa.n_states();
    let matrices = (0..nfa.n_letters())
        .map(|x| {
            let mut m = Matrix::zeros(dim);
            for p in 0..dim {
                for &q in nfa.successors(p, x) {
                    m.data[p * dim + q] = 1;
                }
            }
            m
        })
        .collect();
    MatrixSet::new(matrices).expect("at least one letter")
}

/// True iff for every entry position some product of the set is positive
/// there; equivalently, the associated NFA is strongly connected.
pub fn is_irreducible(ms: &MatrixSet) -> bool {
    analysis::is_strongly_connected(&to_nfa(ms))
}

/// A word whose matrix product is the zero matrix, or `None` if the monoid
/// avoids zero. The product is recomputed entry by entry as a check.
pub fn mortality_witness(ms: &MatrixSet, max_states: usize) -> Result<Option<Word>, Error> {
    let word = match oracles::shortest_mortal_word(&to_nfa(ms), max_states)? {
        Some(w) => w,
        None => return Ok(None),
    };
    let (product, _) = ms.product(&word)?;
    if !product.is_zero() {
        return Err(Error::certification(format!(
            "claimed mortality witness {word} has a nonzero product"
        )));
    }
    Ok(Some(word))
}

/// A word whose matrix product has a strictly positive column, for sets whose
/// automaton is a total DFA; this is exactly a reset word of that DFA.
pub fn ergodicity_witness(ms: &MatrixSet, max_states: usize) -> Result<Option<Word>, Error> {
    let nfa = to_nfa(ms);
    if !nfa.is_total_dfa() {
        return Err(Error::contract(
            "ergodicity witnesses are computed for sets whose automaton is a total DFA",
        ));
    }
    let word = match oracles::shortest_reset_word(&nfa, max_states)? {
        Some(w) => w,
        None => return Ok(None),
    };
    let (product, _) = ms.product(&word)?;
    if product.positive_column().is_none() {
        return Err(Error::certification(format!(
            "claimed ergodicity witness {word} has no positive column"
        )));
    }
    Ok(Some(word))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked two-matrix example whose automaton carries a diamond.
    pub(crate) fn diamond_matrices() -> MatrixSet {
        MatrixSet::new(vec![
            Matrix::from_rows(vec![vec![2, 1, 0], vec![0, 0, 0], vec![4, 0, 0]]).unwrap(),
            Matrix::from_rows(vec![vec![0, 0, 1], vec![0, 0, 7], vec![0, 0, 0]]).unwrap(),
        ])
        .unwrap()
    }

    fn diamond_nfa() -> Nfa {
        Nfa::from_transitions(
            3,
            2,
            [(0, 0, 0), (0, 0, 1), (2, 0, 0), (0, 1, 2), (1, 1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn positivity_pattern_gives_the_expected_nfa() {
        assert_eq!(to_nfa(&diamond_matrices()), diamond_nfa());
    }

    #[test]
    fn zero_matrix_gives_the_empty_relation() {
        let ms = MatrixSet::new(vec![Matrix::zeros(2)]).unwrap();
        assert_eq!(to_nfa(&ms), Nfa::new(2, 1).unwrap());
    }

    #[test]
    fn identity_matrix_gives_self_loops() {
        let ms = MatrixSet::new(vec![Matrix::identity(2)]).unwrap();
        let expected = Nfa::from_transitions(2, 1, [(0, 0, 0), (1, 0, 1)]).unwrap();
        assert_eq!(to_nfa(&ms), expected);
    }

    #[test]
    fn nfa_round_trip_is_identity() {
        let nfa = diamond_nfa();
        assert_eq!(to_nfa(&from_nfa(&nfa)), nfa);
    }

    #[test]
    fn skeleton_of_the_example_matrices_is_zero_one() {
        let skeleton = from_nfa(&to_nfa(&diamond_matrices()));
        assert_eq!(skeleton.matrix(0).get(0, 0), 1, "entry 2 becomes 1");
        assert_eq!(skeleton.matrix(1).get(1, 2), 1, "entry 7 becomes 1");
        assert_eq!(skeleton.matrix(0).get(1, 1), 0);
    }

    #[test]
    fn irreducibility_matches_strong_connectivity() {
        // The example pair closes the cycle 1 -> 2 -> 3 -> 1, so it is
        // irreducible.
        assert!(is_irreducible(&diamond_matrices()));

        let cycle = MatrixSet::new(vec![Matrix::from_rows(vec![
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, 0, 0],
        ])
        .unwrap()])
        .unwrap();
        assert!(is_irreducible(&cycle));

        let triangular = MatrixSet::new(vec![
            Matrix::from_rows(vec![vec![1, 1], vec![0, 1]]).unwrap()
        ])
        .unwrap();
        assert!(!is_irreducible(&triangular));
    }

    #[test]
    fn mortality_witness_of_the_example_is_bb() {
        let w = mortality_witness(&diamond_matrices(), 20).unwrap().unwrap();
        assert_eq!(w.to_string(), "bb");
        let (product, saturated) = diamond_matrices().product(&w).unwrap();
        assert!(product.is_zero());
        assert!(!saturated);
    }

    #[test]
    fn irreducible_set_with_identity_is_immortal() {
        let ms = MatrixSet::new(vec![
            Matrix::identity(2),
            Matrix::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap(),
        ])
        .unwrap();
        assert_eq!(mortality_witness(&ms, 20).unwrap(), None);
    }

    #[test]
    fn ergodicity_witness_of_a_merge_dfa() {
        let merge =
            Nfa::from_transitions(2, 2, [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)]).unwrap();
        let ms = from_nfa(&merge);
        let w = ergodicity_witness(&ms, 20).unwrap().unwrap();
        assert_eq!(w.to_string(), "a");
        let (product, _) = ms.product(&w).unwrap();
        assert_eq!(product.positive_column(), Some(0));
    }

    #[test]
    fn rotation_has_no_ergodicity_witness() {
        let rot = Nfa::from_transitions(2, 1, [(0, 0, 1), (1, 0, 0)]).unwrap();
        assert_eq!(ergodicity_witness(&from_nfa(&rot), 20).unwrap(), None);
    }

    #[test]
    fn ergodicity_needs_a_total_dfa_pattern() {
        assert!(matches!(
            ergodicity_witness(&diamond_matrices(), 20).unwrap_err(),
            Error::Contract(_)
        ));
    }

    #[test]
    fn saturation_is_flagged_not_wrapped() {
        let big = Matrix::from_rows(vec![vec![u64::MAX, 0], vec![0, u64::MAX]]).unwrap();
        let (product, saturated) = big.saturating_mul(&big);
        assert!(saturated);
        assert_eq!(product.get(0, 0), u64::MAX);
    }

    #[test]
    fn json_round_trip_keeps_entries() {
        let ms = diamond_matrices();
        let parsed = MatrixSet::from_json(&ms.to_json()).unwrap();
        assert_eq!(parsed, ms);
        let value: serde_json::Value = serde_json::from_str(&ms.to_json()).unwrap();
        assert_eq!(value["dim"], 3);
        assert_eq!(value["matrices"][1][1][2], 7);
    }

    #[test]
    fn json_rejects_ragged_matrices() {
        let text = r#"{"dim": 2, "matrices": [[[1, 0], [0]]]}"#;
        assert!(MatrixSet::from_json(text).is_err());
    }
}
