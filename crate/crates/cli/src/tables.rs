//! Expected values of the two reference dimension tables, kept as data and
//! compared against certificates, never trusted.

/// One row of the table of `dim S'_r` (affine dimensions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table1Row {
    pub dims: &'static [usize],
    /// `dim = slope * r - 1` for `r < initial_below`.
    pub slope: usize,
    pub initial_below: usize,
    /// `(r, dim)` for the single exceptional length, if any.
    pub exceptional: Option<(usize, usize)>,
    /// `dim` for `r >= plateau_from`.
    pub plateau: usize,
    pub plateau_from: usize,
}

impl Table1Row {
    pub fn expected(&self, r: usize) -> Option<usize> {
        if r >= self.plateau_from {
            return Some(self.plateau);
        }
        if let Some((er, ev)) = self.exceptional {
            if r == er {
                return Some(ev);
            }
        }
        (r >= 1 && r < self.initial_below).then(|| self.slope * r - 1)
    }
}

const fn two_n(dims: &'static [usize], n: usize) -> Table1Row {
    Table1Row {
        dims,
        slope: 2 * n + 1,
        initial_below: 2 * n - 1,
        exceptional: Some((2 * n - 1, 4 * n * n - 3)),
        plateau: 4 * n * n - 1,
        plateau_from: 2 * n,
    }
}

const fn plain(dims: &'static [usize], slope: usize, l: usize, plateau: usize) -> Table1Row {
    Table1Row {
        dims,
        slope,
        initial_below: l,
        exceptional: None,
        plateau,
        plateau_from: l,
    }
}

pub const TABLE1: &[Table1Row] = &[
    Table1Row {
        dims: &[2, 1],
        slope: 3,
        initial_below: 2,
        exceptional: None,
        plateau: 3,
        plateau_from: 2,
    },
    two_n(&[2, 2], 2),
    two_n(&[2, 3], 3),
    two_n(&[2, 4], 4),
    two_n(&[2, 5], 5),
    two_n(&[2, 6], 6),
    two_n(&[2, 7], 7),
    two_n(&[2, 8], 8),
    plain(&[3, 3], 9, 9, 80),
    plain(&[3, 4], 11, 14, 143),
    plain(&[3, 5], 13, 18, 224),
    plain(&[4, 4], 13, 20, 255),
    plain(&[2, 2, 2], 7, 10, 63),
    plain(&[2, 2, 3], 9, 16, 143),
    plain(&[2, 2, 4], 11, 24, 255),
    plain(&[2, 2, 2, 2], 9, 29, 255),
];

/// One row of lower bounds for `dim S^G_r`, `r = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table2Row {
    pub m: usize,
    pub n: usize,
    pub values: &'static [usize],
}

pub const TABLE2: &[Table2Row] = &[
    Table2Row { m: 2, n: 1, values: &[1, 2] },
    Table2Row { m: 2, n: 2, values: &[2, 5, 7, 8] },
    Table2Row { m: 2, n: 3, values: &[3, 7, 11, 14, 16, 17] },
    Table2Row { m: 2, n: 4, values: &[4, 9, 14, 19, 23, 26, 28, 29] },
    Table2Row { m: 2, n: 5, values: &[5, 11, 17, 23, 29, 34, 38, 41, 43, 44] },
    Table2Row { m: 2, n: 6, values: &[6, 13, 20, 27, 34, 41, 47, 52, 56, 59, 61, 62] },
    Table2Row { m: 2, n: 7, values: &[7, 15, 23, 31, 39, 47, 53, 62, 68, 73, 77, 80, 82, 83] },
    Table2Row {
        m: 2,
        n: 8,
        values: &[8, 17, 26, 35, 44, 53, 62, 71, 79, 86, 92, 97, 101, 104, 106, 107],
    },
    Table2Row { m: 3, n: 1, values: &[2, 4, 5] },
    Table2Row { m: 3, n: 2, values: &[3, 7, 11, 14, 16, 17] },
    Table2Row { m: 3, n: 3, values: &[4, 9, 14, 19, 24, 29, 32, 34, 35] },
    Table2Row { m: 3, n: 4, values: &[5, 11, 17, 23, 29, 35, 41, 47, 53, 56, 58, 59] },
    Table2Row {
        m: 3,
        n: 5,
        values: &[6, 13, 20, 27, 34, 41, 48, 55, 62, 69, 76, 83, 86, 88, 89],
    },
    Table2Row { m: 4, n: 1, values: &[3, 6, 8, 9] },
    Table2Row { m: 4, n: 2, values: &[4, 9, 14, 19, 23, 26, 28, 29] },
    Table2Row { m: 4, n: 3, values: &[5, 11, 17, 23, 29, 35, 41, 47, 53, 56, 58, 59] },
    Table2Row {
        m: 4,
        n: 4,
        values: &[6, 13, 20, 27, 34, 41, 48, 55, 62, 69, 76, 83, 90, 96, 98, 99],
    },
];

pub fn table1_row(dims: &[usize]) -> Option<&'static Table1Row> {
    TABLE1.iter().find(|row| row.dims == dims)
}

pub fn table2_row(m: usize, n: usize) -> Option<&'static Table2Row> {
    TABLE2.iter().find(|row| row.m == m && row.n == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sepdim::dim::{dim_s_g, length_lower_bound, per_term_dim};
    use sepdim::SystemShape;

    #[test]
    fn table1_rows_follow_the_closed_forms() {
        for row in TABLE1 {
            let shape = SystemShape::new(row.dims.to_vec()).unwrap();
            let d = shape.d();
            assert_eq!(row.slope, per_term_dim(&shape, false), "{:?}", row.dims);
            assert_eq!(row.plateau, d * d - 1, "{:?}", row.dims);
            assert_eq!(row.plateau_from, length_lower_bound(&shape), "{:?}", row.dims);
        }
    }

    #[test]
    fn table2_rows_end_at_dim_s_g_and_start_at_m_plus_n_minus_2() {
        for row in TABLE2 {
            let shape = SystemShape::new(vec![row.m, row.n]).unwrap();
            assert_eq!(*row.values.last().unwrap(), dim_s_g(&shape));
            assert_eq!(row.values[0], row.m + row.n - 2);
            assert!(row.values.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(TABLE2.len(), 17);
    }

    #[test]
    fn expected_lookup() {
        let row = table1_row(&[2, 3]).unwrap();
        assert_eq!(row.expected(4), Some(27));
        assert_eq!(row.expected(5), Some(33));
        assert_eq!(row.expected(6), Some(35));
        assert_eq!(row.expected(9), Some(35));
        assert_eq!(table1_row(&[2, 1]).unwrap().expected(1), Some(2));
    }
}
