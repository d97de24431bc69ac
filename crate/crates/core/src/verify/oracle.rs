//! Direct table computations that do not go through formulas. The demos
//! compare formula-level results against these.

/// Row-major `n × n` table, `t[x * n + y] = x·y`.
pub type Table = Vec<usize>;

pub fn is_latin(t: &[usize], n: usize) -> bool {
    (0..n).all(|x| {
        let mut row = vec![false; n];
        let mut col = vec![false; n];
        (0..n).all(|y| {
            let (r, c) = (t[x * n + y], t[y * n + x]);
            !std::mem::replace(&mut row[r], true) && !std::mem::replace(&mut col[c], true)
        })
    })
}

pub fn is_associative(t: &[usize], n: usize) -> bool {
    (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| t[t[x * n + y] * n + z] == t[x * n + t[y * n + z]])))
}

pub fn is_commutative(t: &[usize], n: usize) -> bool {
    (0..n).all(|x| (0..n).all(|y| t[x * n + y] == t[y * n + x]))
}

/// Has a two-sided identity, is associative, and every element has a
/// two-sided inverse.
pub fn is_group(t: &[usize], n: usize) -> bool {
    let Some(id) = (0..n).find(|&e| (0..n).all(|x| t[e * n + x] == x && t[x * n + e] == x)) else {
        return false;
    };
    is_associative(t, n) && (0..n).all(|x| (0..n).any(|y| t[x * n + y] == id && t[y * n + x] == id))
}

/// All Latin squares of order `n`, in row-major lexicographic order.
pub fn latin_squares(n: usize) -> Vec<Table> {
    fn fill(pos: usize, n: usize, t: &mut Table, rows: &mut [Vec<bool>], cols: &mut [Vec<bool>], out: &mut Vec<Table>) {
        if pos == n * n {
            out.push(t.clone());
            return;
        }
        let (x, y) = (pos / n, pos % n);
        for v in 0..n {
            if !rows[x][v] && !cols[y][v] {
                rows[x][v] = true;
                cols[y][v] = true;
                t[pos] = v;
                fill(pos + 1, n, t, rows, cols, out);
                rows[x][v] = false;
                cols[y][v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut rows = vec![vec![false; n]; n];
    let mut cols = vec![vec![false; n]; n];
    fill(0, n, &mut vec![0; n * n], &mut rows, &mut cols, &mut out);
    out
}

/// Every `n × n` table, in row-major lexicographic order.
pub fn all_tables(n: usize) -> impl Iterator<Item = Table> {
    let cells = n * n;
    (0..n.pow(cells as u32)).map(move |code| crate::model::decode(code, n, cells))
}

/// Strict partial orders on `{0..n-1}` as adjacency matrices, by brute force
/// over all relations.
pub fn strict_partial_orders(n: usize) -> Vec<Vec<bool>> {
    let cells = n * n;
    (0..1usize << cells)
        .map(|bits| {
            (0..cells)
                .map(|i| bits >> (cells - 1 - i) & 1 == 1)
                .collect::<Vec<bool>>()
        })
        .filter(|r| {
            (0..n).all(|x| !r[x * n + x])
                && (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| !(r[x * n + y] && r[y * n + z]) || r[x * n + z])))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latin_counts_match_filtered_tables() {
        for n in 1..=3 {
            let filtered = all_tables(n).filter(|t| is_latin(t, n)).count();
            assert_eq!(latin_squares(n).len(), filtered);
        }
        assert_eq!(latin_squares(3).len(), 12);
    }

    #[test]
    fn group_oracle_on_small_tables() {
        // order 2 and 3: exactly the labeled cyclic groups
        let g2: Vec<Table> = all_tables(2).filter(|t| is_group(t, 2)).collect();
        assert_eq!(g2, vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1]]);
        assert_eq!(all_tables(3).filter(|t| is_group(t, 3)).count(), 3);
        // every group table is a Latin square
        assert!(latin_squares(4)
            .iter()
            .filter(|t| is_group(t, 4))
            .all(|t| is_latin(t, 4)));
    }

    #[test]
    fn poset_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| strict_partial_orders(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 19, 219]);
    }
}
