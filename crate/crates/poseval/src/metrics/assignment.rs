//! Exact assignment via the Hungarian method (potentials formulation).

/// Maximum-total-weight one-to-one assignment of rows to columns.
///
/// Returns, per row, the assigned column (every row is assigned when
/// rows <= cols; with rows > cols the surplus rows get `None`).
pub fn hungarian_max(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let m = weights[0].len();
    if m == 0 {
        return vec![None; n];
    }
    // Minimize negated weights on a square matrix padded with zeros.
    let dim = n.max(m);
    let cost = |i: usize, j: usize| -> f64 {
        if i < n && j < m {
            -weights[i][j]
        } else {
            0.0
        }
    };
    const INF: f64 = f64::INFINITY;
    let mut u = vec![0.0; dim + 1];
    let mut v = vec![0.0; dim + 1];
    let mut p = vec![dim; dim + 1]; // column -> assigned row (dim = none)
    let mut way = vec![0usize; dim + 1];
    for i in 0..dim {
        p[dim] = i;
        let mut j0 = dim;
        let mut minv = vec![INF; dim + 1];
        let mut used = vec![false; dim + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = dim;
            for j in 0..dim {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=dim {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == dim {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == dim {
                break;
            }
        }
    }
    let mut result = vec![None; n];
    for j in 0..dim {
        let i = p[j];
        if i < n && j < m {
            result[i] = Some(j);
        }
    }
    result
}
