//! The CSS code families under study: rotated surface, 4.8.8 color, toric,
//! and lift-connected surface (LCS) codes.
//!
//! Qubit indexing is row-major within a sheet or lattice, sheets ordered by
//! their cyclic index; the same order is used by the model-export schema so
//! external tools can map spins back to qubits.

use crate::gf2::{BitMatrix, BitVec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid code parameter: {0}")]
    InvalidParam(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("unknown code spec '{0}' (expected surface:d, color:d, toric:d or lcs:L,ell)")]
    UnknownSpec(String),
}

/// A CSS stabilizer code with chosen logical generators.
///
/// Invariants (checked by [`validate`]): `hx * hz^T = 0`, logicals commute
/// with all checks, `lx * lz^T = I_k`, and `rank(hx) + rank(hz) = n - k`.
#[derive(Clone)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub lx: BitMatrix,
    pub lz: BitMatrix,
    pub declared_distance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    X,
    Z,
}

/// Outcome of checking the `CssCode` invariants; empty `failures` means valid.
#[derive(Debug, Default, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate(code: &CssCode) -> ValidationReport {
    let mut failures = Vec::new();
    let comm = code.hx.mul_transpose(&code.hz);
    if (0..comm.rows()).any(|r| !comm.row(r).is_zero()) {
        failures.push("CSS orthogonality violated: hx * hz^T != 0".into());
    }
    let lxhz = code.lx.mul_transpose(&code.hz);
    if (0..lxhz.rows()).any(|r| !lxhz.row(r).is_zero()) {
        failures.push("X logicals do not commute with Z checks".into());
    }
    let lzhx = code.lz.mul_transpose(&code.hx);
    if (0..lzhx.rows()).any(|r| !lzhx.row(r).is_zero()) {
        failures.push("Z logicals do not commute with X checks".into());
    }
    if code.lx.mul_transpose(&code.lz) != BitMatrix::identity(code.k) {
        failures.push("logical pairing lx * lz^T is not the identity".into());
    }
    let (rx, rz) = (code.hx.rank(), code.hz.rank());
    if rx + rz != code.n - code.k {
        failures.push(format!(
            "rank(hx) + rank(hz) = {} + {} != n - k = {}",
            rx,
            rz,
            code.n - code.k
        ));
    }
    if rx != code.hx.rows() || rz != code.hz.rows() {
        failures.push("check matrices contain dependent rows".into());
    }
    ValidationReport { failures }
}

/// Minimum weight over nonzero logical-class representatives in one sector.
///
/// Enumerates all `2^k - 1` logical combinations times all `2^rank` stabilizer
/// elements, so it is gated at `rank + k <= 26`.
pub fn distance_bruteforce(code: &CssCode, sector: Sector) -> Result<usize, CodeError> {
    let (l, h) = match sector {
        Sector::X => (&code.lx, &code.hx),
        Sector::Z => (&code.lz, &code.hz),
    };
    let r = h.rows();
    if r + code.k > 26 {
        return Err(CodeError::TooLarge(format!(
            "distance enumeration needs 2^{} combinations",
            r + code.k
        )));
    }
    if code.n > 64 {
        return Err(CodeError::TooLarge("distance enumeration limited to n <= 64".into()));
    }
    let hrows: Vec<u64> = (0..r).map(|i| h.row_mask(i)).collect();
    let lrows: Vec<u64> = (0..code.k).map(|i| l.row_mask(i)).collect();
    let mut best = u32::MAX;
    for lbits in 1u64..(1 << code.k) {
        let mut base = 0u64;
        for (i, &lr) in lrows.iter().enumerate() {
            if lbits >> i & 1 == 1 {
                base ^= lr;
            }
        }
        // Gray-code walk over the stabilizer span
        let mut v = base;
        best = best.min(v.count_ones());
        for g in 1u64..(1 << r) {
            let flip = (g ^ (g >> 1)) ^ ((g - 1) ^ ((g - 1) >> 1));
            v ^= hrows[flip.trailing_zeros() as usize];
            best = best.min(v.count_ones());
        }
    }
    Ok(best as usize)
}

/// The bare single qubit: no checks, `lx = X`, `lz = Z`. Used as the `d = 1`
/// reference curve for pseudo-thresholds.
pub fn single_qubit() -> CssCode {
    let one = BitMatrix::from_rows(&[BitVec::from_bools(&[true])], 1);
    CssCode {
        name: "surface:1".into(),
        n: 1,
        k: 1,
        hx: BitMatrix::zeros(0, 1),
        hz: BitMatrix::zeros(0, 1),
        lx: one.clone(),
        lz: one,
        declared_distance: 1,
    }
}

/// Rotated surface code `[[d^2, 1, d]]` for odd `d >= 1`.
pub fn build_rotated_surface(d: usize) -> Result<CssCode, CodeError> {
    if d % 2 == 0 || d < 1 {
        return Err(CodeError::InvalidParam(format!(
            "surface code distance must be odd and >= 1, got {d}"
        )));
    }
    if d == 1 {
        return Ok(single_qubit());
    }
    let n = d * d;
    let q = |r: usize, c: usize| r * d + c;
    let mut xs: Vec<BitVec> = Vec::new();
    let mut zs: Vec<BitVec> = Vec::new();
    // Cells (r, c) cover qubits (r, c), (r, c+1), (r+1, c), (r+1, c+1).
    // Bulk cells alternate X/Z by (r + c) parity; weight-2 boundary cells keep
    // X checks on the top/bottom rows and Z checks on the left/right columns.
    for r in -1i64..d as i64 {
        for c in -1i64..d as i64 {
            let cell: Vec<(i64, i64)> = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .into_iter()
                .filter(|&(a, b)| a >= 0 && a < d as i64 && b >= 0 && b < d as i64)
                .collect();
            let is_x = (r + c).rem_euclid(2) == 1;
            let bulk = r >= 0 && r < d as i64 - 1 && c >= 0 && c < d as i64 - 1;
            if !bulk {
                if cell.len() != 2 {
                    continue;
                }
                let horizontal = r == -1 || r == d as i64 - 1;
                if horizontal != is_x {
                    continue;
                }
            }
            let mut row = BitVec::zeros(n);
            for (a, b) in cell {
                row.set(q(a as usize, b as usize), true);
            }
            if is_x {
                xs.push(row);
            } else {
                zs.push(row);
            }
        }
    }
    let mut lz = BitVec::zeros(n);
    for c in 0..d {
        lz.set(q(0, c), true); // Z along the top row
    }
    let mut lx = BitVec::zeros(n);
    for r in 0..d {
        lx.set(q(r, 0), true); // X along the left column
    }
    Ok(CssCode {
        name: format!("surface:{d}"),
        n,
        k: 1,
        hx: BitMatrix::from_rows(&xs, n),
        hz: BitMatrix::from_rows(&zs, n),
        lx: BitMatrix::from_rows(&[lx], n),
        lz: BitMatrix::from_rows(&[lz], n),
        declared_distance: d,
    })
}

/// 4.8.8 triangular color code `[[(d^2-1)/2 + d, 1, d]]` for odd `d >= 3`.
///
/// Octagons sit at centers `(4a, 4b)` with vertices `(±1, ±2)` and `(±2, ±1)`
/// relative to the center, squares at `(4a+2, 4b+2)` with vertices
/// `(±1, 0), (0, ±1)`. X and Z checks share the same support on every face.
pub fn build_color_488(d: usize) -> Result<CssCode, CodeError> {
    if d % 2 == 0 || d < 3 {
        return Err(CodeError::InvalidParam(format!(
            "color code distance must be odd and >= 3, got {d}"
        )));
    }
    let octagon = |cx: i64, cy: i64| -> Vec<(i64, i64)> {
        [(1, 2), (-1, 2), (1, -2), (-1, -2), (2, 1), (-2, 1), (2, -1), (-2, -1)]
            .iter()
            .map(|&(dx, dy)| (cx + dx, cy + dy))
            .collect()
    };
    let square = |cx: i64, cy: i64| -> Vec<(i64, i64)> {
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .map(|&(dx, dy)| (cx + dx, cy + dy))
            .collect()
    };
    // keep: E = east of a vertical cut through the center, N/S/W likewise,
    // SE = below the 45-degree diagonal through the center
    let half = |cx: i64, cy: i64, which: &str| -> Vec<(i64, i64)> {
        octagon(cx, cy)
            .into_iter()
            .filter(|&(x, y)| match which {
                "E" => x > cx,
                "W" => x < cx,
                "N" => y > cy,
                "S" => y < cy,
                "SE" => (y - cy) - (x - cx) < 0,
                _ => unreachable!(),
            })
            .collect()
    };
    let mut faces: Vec<Vec<(i64, i64)>> = Vec::new();
    if d == 3 {
        faces.push(half(0, 0, "E"));
        faces.push(half(4, 0, "W"));
        faces.push(square(2, 2));
    } else {
        let m = (d as i64 - 3) / 2;
        for a in (1 - m..=0).rev() {
            for b in (1 - m..=a).rev() {
                faces.push(octagon(4 * a, 4 * b));
            }
        }
        for a in (-m..=0).rev() {
            for b in (-m..=a).rev() {
                faces.push(square(4 * a + 2, 4 * b + 2));
            }
        }
        faces.push(half(0, 4, "S"));
        let mut t = 0;
        while 2 * t <= m - 1 {
            faces.push(half(4, -8 * t, "W"));
            t += 1;
        }
        for t in 0..m {
            faces.push(half(-4 * (t + 1), -4 * t, "SE"));
        }
        let mut t = 0;
        while -m + 2 * t <= 0 {
            faces.push(half(4 * (-m + 2 * t), -4 * m, "N"));
            t += 1;
        }
    }
    // qubits: union of face vertices, ordered row-major (y descending, x ascending)
    let mut sites: Vec<(i64, i64)> = faces.iter().flatten().copied().collect();
    sites.sort_by_key(|&(x, y)| (-y, x));
    sites.dedup();
    let n = sites.len();
    let expected = (d * d - 1) / 2 + d;
    debug_assert_eq!(n, expected, "4.8.8 face rules out of sync");
    let index = |s: &(i64, i64)| sites.binary_search_by_key(&(-s.1, s.0), |&(x, y)| (-y, x)).unwrap();
    let rows: Vec<BitVec> = faces
        .iter()
        .map(|f| BitVec::from_indices(n, &f.iter().map(index).collect::<Vec<_>>()))
        .collect();
    let h = BitMatrix::from_rows(&rows, n);
    let (lx, lz) = logicals_from_checks(n, 1, &h, &h)?;
    Ok(CssCode {
        name: format!("color:{d}"),
        n,
        k: 1,
        hx: h.clone(),
        hz: h,
        lx,
        lz,
        declared_distance: d,
    })
}

/// Toric code `[[2d^2, 2, d]]` on a periodic `d x d` lattice, `d >= 2`.
///
/// One plaquette and one star are dropped so the remaining generators are
/// independent (their product over the closed surface is the identity).
pub fn build_toric(d: usize) -> Result<CssCode, CodeError> {
    if d < 2 {
        return Err(CodeError::InvalidParam(format!("toric code needs d >= 2, got {d}")));
    }
    let n = 2 * d * d;
    let h = |i: usize, j: usize| (i % d) * d + (j % d); // edge (i,j)-(i+1,j)
    let v = |i: usize, j: usize| d * d + (i % d) * d + (j % d); // edge (i,j)-(i,j+1)
    let mut xs: Vec<BitVec> = Vec::new();
    let mut zs: Vec<BitVec> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let star = BitVec::from_indices(n, &[h(i, j), h((i + d - 1) % d, j), v(i, j), v(i, (j + d - 1) % d)]);
            let plaq = BitVec::from_indices(n, &[h(i, j), h(i, j + 1), v(i, j), v(i + 1, j)]);
            xs.push(star);
            zs.push(plaq);
        }
    }
    xs.pop(); // drop the redundant generator in each sector
    zs.pop();
    let mut lx = BitMatrix::zeros(0, n);
    let mut lz = BitMatrix::zeros(0, n);
    lx.push_row(&BitVec::from_indices(n, &(0..d).map(|i| v(i, 0)).collect::<Vec<_>>()));
    lx.push_row(&BitVec::from_indices(n, &(0..d).map(|j| h(0, j)).collect::<Vec<_>>()));
    lz.push_row(&BitVec::from_indices(n, &(0..d).map(|j| v(0, j)).collect::<Vec<_>>()));
    lz.push_row(&BitVec::from_indices(n, &(0..d).map(|i| h(i, 0)).collect::<Vec<_>>()));
    Ok(CssCode {
        name: format!("toric:{d}"),
        n,
        k: 2,
        hx: BitMatrix::from_rows(&xs, n),
        hz: BitMatrix::from_rows(&zs, n),
        lx,
        lz,
        declared_distance: d,
    })
}

/// Lift-connected surface code `[[((l+1)^2 + l^2) L, L, min(L, 2l+1)]]`.
///
/// `L` surface-code sheets of linear size `l+1` in a periodic stack. Each
/// in-sheet check picks up one qubit on each cyclically adjacent sheet,
/// which lifts the two-spin interactions of a sheet to three-spin terms.
pub fn build_lcs(big_l: usize, ell: usize) -> Result<CssCode, CodeError> {
    if big_l < 2 || ell < 1 {
        return Err(CodeError::InvalidParam(format!(
            "lcs needs L >= 2 and ell >= 1, got L={big_l}, ell={ell}"
        )));
    }
    let s = ell + 1;
    let per = s * s + ell * ell;
    let n = per * big_l;
    // in-sheet: A-grid row-major (j * s + i), then B-grid (s^2 + j * ell + i)
    let a = |q: usize, i: usize, j: usize| (q % big_l) * per + j * s + i;
    let b = |q: usize, i: usize, j: usize| (q % big_l) * per + s * s + j * ell + i;
    let mut xs: Vec<BitVec> = Vec::new();
    let mut zs: Vec<BitVec> = Vec::new();
    for q in 0..big_l {
        // X checks between vertically adjacent A sites, at (i, j+1/2)
        for i in 0..s {
            for j in 0..s - 1 {
                let mut row = BitVec::zeros(n);
                row.set(a(q, i, j), true);
                row.set(a(q, i, j + 1), true);
                if i >= 1 {
                    row.set(b(q, i - 1, j), true);
                }
                if i + 1 < s {
                    row.set(b(q, i, j), true);
                }
                row.flip(a(q + 1, i, j)); // lower qubit on the next sheet
                if i >= 1 {
                    row.flip(b(q + big_l - 1, i - 1, j)); // left qubit on the previous sheet
                }
                xs.push(row);
            }
        }
        // Z checks between horizontally adjacent A sites, at (i+1/2, j)
        for i in 0..s - 1 {
            for j in 0..s {
                let mut row = BitVec::zeros(n);
                row.set(a(q, i, j), true);
                row.set(a(q, i + 1, j), true);
                if j >= 1 {
                    row.set(b(q, i, j - 1), true);
                }
                if j + 1 < s {
                    row.set(b(q, i, j), true);
                }
                row.flip(a(q + 1, i + 1, j)); // right qubit on the next sheet
                if j + 1 < s {
                    row.flip(b(q + big_l - 1, i, j)); // upper qubit on the previous sheet
                }
                zs.push(row);
            }
        }
    }
    let hx = BitMatrix::from_rows(&xs, n);
    let hz = BitMatrix::from_rows(&zs, n);
    let (lx, lz) = logicals_from_checks(n, big_l, &hx, &hz)?;
    Ok(CssCode {
        name: format!("lcs:{big_l},{ell}"),
        n,
        k: big_l,
        hx,
        hz,
        lx,
        lz,
        declared_distance: big_l.min(2 * ell + 1),
    })
}

/// Extracts a paired logical basis (`lx * lz^T = I`) from the check matrices.
fn logicals_from_checks(
    n: usize,
    k: usize,
    hx: &BitMatrix,
    hz: &BitMatrix,
) -> Result<(BitMatrix, BitMatrix), CodeError> {
    let pick = |ker: &BitMatrix, checks: &BitMatrix| -> BitMatrix {
        let mut acc = checks.clone();
        let mut out = BitMatrix::zeros(0, n);
        for row in ker.row_iter() {
            if !acc.in_row_space(&row) {
                acc.push_row(&row);
                out.push_row(&row);
            }
        }
        out
    };
    let lx = pick(&hz.null_space(), hx);
    let lz_raw = pick(&hx.null_space(), hz);
    if lx.rows() != k || lz_raw.rows() != k {
        return Err(CodeError::InvalidParam(format!(
            "logical extraction found {} X and {} Z generators, expected {k}",
            lx.rows(),
            lz_raw.rows()
        )));
    }
    let m = lx.mul_transpose(&lz_raw);
    let minv = m
        .inverse()
        .ok_or_else(|| CodeError::InvalidParam("degenerate logical pairing".into()))?;
    // lz = (m^-1)^T * lz_raw makes lx * lz^T the identity
    let mut lz = BitMatrix::zeros(0, n);
    for i in 0..k {
        let mut row = BitVec::zeros(n);
        for j in 0..k {
            if minv.get(j, i) {
                row.xor_assign(&lz_raw.row(j));
            }
        }
        lz.push_row(&row);
    }
    Ok((lx, lz))
}

/// Parses `family:params` code specs: `surface:d`, `color:d`, `toric:d`, `lcs:L,ell`.
pub fn parse_spec(spec: &str) -> Result<CssCode, CodeError> {
    let (family, params) = spec
        .split_once(':')
        .ok_or_else(|| CodeError::UnknownSpec(spec.into()))?;
    let parse = |s: &str| -> Result<usize, CodeError> {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CodeError::UnknownSpec(spec.into()))
    };
    match family {
        "surface" => build_rotated_surface(parse(params)?),
        "color" => build_color_488(parse(params)?),
        "toric" => build_toric(parse(params)?),
        "lcs" => {
            let (l, ell) = params
                .split_once(',')
                .ok_or_else(|| CodeError::UnknownSpec(spec.into()))?;
            build_lcs(parse(l)?, parse(ell)?)
        }
        _ => Err(CodeError::UnknownSpec(spec.into())),
    }
}

/// Serializable snapshot of a code, rows hex-packed (bit `i` of a row sits in
/// byte `i / 8` at position `i % 8`; bytes print in ascending order).
#[derive(Serialize, Deserialize)]
pub struct CodeExport {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub declared_distance: usize,
    pub hx: Vec<String>,
    pub hz: Vec<String>,
    pub lx: Vec<String>,
    pub lz: Vec<String>,
}

fn pack_row_hex(row: &BitVec) -> String {
    let mut bytes = vec![0u8; row.len().div_ceil(8)];
    for i in row.iter_ones() {
        bytes[i / 8] |= 1 << (i % 8);
    }
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl CodeExport {
    pub fn from_code(code: &CssCode) -> Self {
        let pack = |m: &BitMatrix| m.row_iter().map(|r| pack_row_hex(&r)).collect();
        Self {
            name: code.name.clone(),
            n: code.n,
            k: code.k,
            declared_distance: code.declared_distance,
            hx: pack(&code.hx),
            hz: pack(&code.hz),
            lx: pack(&code.lx),
            lz: pack(&code.lz),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_valid(code: &CssCode) {
        let report = validate(code);
        assert!(report.is_valid(), "{}: {:?}", code.name, report.failures);
    }

    #[test]
    fn surface_family() {
        let c = build_rotated_surface(3).unwrap();
        assert_eq!((c.n, c.k), (9, 1));
        assert_valid(&c);
        assert_eq!(distance_bruteforce(&c, Sector::X).unwrap(), 3);
        assert_eq!(distance_bruteforce(&c, Sector::Z).unwrap(), 3);

        let c1 = build_rotated_surface(1).unwrap();
        assert_eq!((c1.n, c1.k), (1, 1));
        assert_eq!(c1.hx.rows(), 0);

        let c5 = build_rotated_surface(5).unwrap();
        assert_eq!(c5.n, 25);
        assert_eq!(c5.hx.rank(), 12);
        assert_eq!(c5.hz.rank(), 12);
        assert_valid(&c5);
        assert_eq!(distance_bruteforce(&c5, Sector::X).unwrap(), 5);

        assert!(build_rotated_surface(4).is_err());
        assert!(build_rotated_surface(0).is_err());
    }

    #[test]
    fn surface_qubit_degrees() {
        // every qubit in <= 2 checks per sector, boundary qubits in exactly 1
        for d in [3, 5, 7] {
            let c = build_rotated_surface(d).unwrap();
            for q in 0..c.n {
                let dx = (0..c.hx.rows()).filter(|&r| c.hx.get(r, q)).count();
                let dz = (0..c.hz.rows()).filter(|&r| c.hz.get(r, q)).count();
                assert!(dx <= 2 && dz <= 2);
                assert!(dx + dz >= 2);
            }
        }
    }

    #[test]
    fn color_family() {
        let steane = build_color_488(3).unwrap();
        assert_eq!((steane.n, steane.k), (7, 1));
        assert_valid(&steane);
        assert_eq!(steane.hx.rank(), 3);
        assert_eq!(distance_bruteforce(&steane, Sector::X).unwrap(), 3);

        let c5 = build_color_488(5).unwrap();
        assert_eq!(c5.n, 17);
        assert_valid(&c5);
        assert_eq!(distance_bruteforce(&c5, Sector::X).unwrap(), 5);

        for d in [7, 9, 11, 13, 15, 17] {
            let c = build_color_488(d).unwrap();
            assert_eq!(c.n, (d * d - 1) / 2 + d);
            assert_valid(&c);
            // each qubit in at most 3 checks per sector, X and Z share support
            for q in 0..c.n {
                let deg = (0..c.hx.rows()).filter(|&r| c.hx.get(r, q)).count();
                assert!((1..=3).contains(&deg));
            }
            assert_eq!(c.hx, c.hz);
        }
        assert!(build_color_488(2).is_err());
    }

    #[test]
    fn color_distance_d7_and_d9() {
        for d in [7, 9] {
            let c = build_color_488(d).unwrap();
            assert_eq!(distance_bruteforce(&c, Sector::X).unwrap(), d, "d = {d}");
        }
    }

    #[test]
    fn toric_family() {
        let t2 = build_toric(2).unwrap();
        assert_eq!((t2.n, t2.k), (8, 2));
        assert_valid(&t2);
        assert_eq!(distance_bruteforce(&t2, Sector::X).unwrap(), 2);

        let t3 = build_toric(3).unwrap();
        assert_eq!(t3.hx.rank(), 8);
        assert_eq!(t3.hz.rank(), 8);
        assert_valid(&t3);
        assert_eq!(distance_bruteforce(&t3, Sector::Z).unwrap(), 3);
        assert!(build_toric(1).is_err());

        // the product of all plaquettes (before dropping one) is the zero vector
        let d = 3;
        let n = 2 * d * d;
        let mut acc = BitVec::zeros(n);
        for r in t3.hz.row_iter() {
            acc.xor_assign(&r);
        }
        // acc equals the dropped plaquette
        assert_eq!(acc.popcount(), 4);
    }

    #[test]
    fn lcs_family() {
        let c = build_lcs(3, 1).unwrap();
        assert_eq!((c.n, c.k), (15, 3));
        assert_valid(&c);
        assert_eq!(distance_bruteforce(&c, Sector::X).unwrap(), 3);
        assert_eq!(distance_bruteforce(&c, Sector::Z).unwrap(), 3);

        for (l, ell) in [(2, 1), (4, 1), (5, 1), (2, 2), (3, 2), (6, 1)] {
            let c = build_lcs(l, ell).unwrap();
            assert_eq!(c.n, ((ell + 1) * (ell + 1) + ell * ell) * l);
            assert_eq!(c.k, l);
            assert_valid(&c);
            let want = l.min(2 * ell + 1);
            if c.hx.rows() + c.k <= 26 {
                assert_eq!(distance_bruteforce(&c, Sector::X).unwrap(), want, "lcs:{l},{ell}");
                assert_eq!(distance_bruteforce(&c, Sector::Z).unwrap(), want, "lcs:{l},{ell}");
            }
        }
        assert_eq!(build_lcs(5, 2).unwrap().n, 65);
        assert!(build_lcs(1, 1).is_err());
    }

    #[test]
    fn validate_flags_broken_code() {
        let mut c = build_rotated_surface(3).unwrap();
        c.hx.set(0, 5, !c.hx.get(0, 5));
        let report = validate(&c);
        assert!(report
            .failures
            .iter()
            .any(|f| f.contains("orthogonality") || f.contains("rank")));
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_spec("surface:3").unwrap().n, 9);
        assert_eq!(parse_spec("color:5").unwrap().n, 17);
        assert_eq!(parse_spec("toric:2").unwrap().n, 8);
        assert_eq!(parse_spec("lcs:3,1").unwrap().n, 15);
        assert!(parse_spec("steane").is_err());
        assert!(parse_spec("surface:x").is_err());
    }

    #[test]
    fn export_hex_round_trip() {
        let c = build_color_488(3).unwrap();
        let ex = CodeExport::from_code(&c);
        assert_eq!(ex.hx.len(), 3);
        for (row, hex) in c.hx.row_iter().zip(&ex.hx) {
            let bytes: Vec<u8> = (0..hex.len() / 2)
                .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).unwrap())
                .collect();
            for i in 0..c.n {
                assert_eq!(row.get(i), (bytes[i / 8] >> (i % 8)) & 1 == 1);
            }
        }
    }
}
