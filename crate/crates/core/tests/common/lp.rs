/// Every basic feasible solution of `A x = b, x ≥ 0`, by brute force.
pub fn vertices(a: &[Vec<f64>], b: &[f64], n: usize) -> Vec<Vec<f64>> {
    let m = a.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        // Gaussian elimination on the m×m basis
        let mut t: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = cols.iter().map(|&j| a[i][j]).collect();
                row.push(b[i]);
                row
            })
            .collect();
        let mut singular = false;
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| t[x][c].abs().total_cmp(&t[y][c].abs())).unwrap();
            if t[p][c].abs() < 1e-9 {
                singular = true;
                break;
            }
            t.swap(c, p);
            for i in 0..m {
                if i != c {
                    let f = t[i][c] / t[c][c];
                    for k in c..=m {
                        t[i][k] -= f * t[c][k];
                    }
                }
            }
        }
        if singular {
            continue;
        }
        let mut x = vec![0.0; n];
        for (i, &j) in cols.iter().enumerate() {
            x[j] = t[i][m] / t[i][i];
        }
        if x.iter().all(|&v| v >= -1e-9) {
            out.push(x);
        }
    }
    out
}

pub fn rank(a: &[Vec<f64>]) -> usize {
    let mut t = a.to_vec();
    let mut r = 0;
    for c in 0..t[0].len() {
        let Some(p) = (r..t.len()).find(|&i| t[i][c].abs() > 1e-9) else {
            continue;
        };
        t.swap(r, p);
        for i in r + 1..t.len() {
            let f = t[i][c] / t[r][c];
            for k in c..t[i].len() {
                t[i][k] -= f * t[r][k];
            }
        }
        r += 1;
    }
    r
}
