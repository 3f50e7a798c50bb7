use rayon::prelude::*;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{hardy_z_grid, hardy_z_unchecked, smooth_count, T_MAX};
use crate::error::{Error, Result};
use crate::special::theta;

/// Scan step for sign changes of `Z`.
pub const GRID_STEP: f64 = 0.05;
/// Final bracket width of every refined ordinate.
pub const REFINE_WIDTH: f64 = 1e-9;
/// Allowed `|count - (θ/π + 1)|` before a table is declared incomplete.
const COUNT_SLACK: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ZeroSource {
    Computed,
    Imported,
}

/// Sorted positive zero ordinates, complete on `covered`.
///
/// `base_count` is the number of zeros below `covered.0`; it is exact for
/// tables starting at 0 and otherwise estimated from the counting function
/// (`base_certified == false`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    covered: (f64, f64),
    source: ZeroSource,
    base_count: usize,
    base_certified: bool,
}

impl ZeroTable {
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn covered(&self) -> (f64, f64) {
        self.covered
    }

    pub fn source(&self) -> ZeroSource {
        self.source
    }

    pub fn base_count(&self) -> usize {
        self.base_count
    }

    pub fn base_certified(&self) -> bool {
        self.base_certified
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.covered.0 <= lo && hi <= self.covered.1
    }

    pub fn require(&self, lo: f64, hi: f64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage {
                lo,
                hi,
                cov_lo: self.covered.0,
                cov_hi: self.covered.1,
            })
        }
    }

    /// Ordinates in `[lo, hi]`.
    pub fn in_range(&self, lo: f64, hi: f64) -> &[f64] {
        let a = self.ordinates.partition_point(|&g| g < lo);
        let b = self.ordinates.partition_point(|&g| g <= hi);
        &self.ordinates[a..b]
    }

    /// `N(t)` as the number of ordinates strictly below `t` (left limit).
    pub fn count_below(&self, t: f64) -> usize {
        self.base_count + self.ordinates.partition_point(|&g| g < t)
    }

    /// Worst `|N(t) - θ(t)/π - 1|` over `samples` evenly spread points.
    pub fn count_discrepancy(&self, samples: usize) -> f64 {
        let (lo, hi) = self.covered;
        (0..samples.max(1))
            .map(|i| {
                let t = lo + (hi - lo) * (i as f64 + 0.5) / samples.max(1) as f64;
                (self.count_below(t) as f64 - smooth_count(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Combine two tables with adjacent or overlapping coverage.
    pub fn merge(&self, other: &ZeroTable) -> Result<ZeroTable> {
        let (a, b) = if self.covered.0 <= other.covered.0 { (self, other) } else { (other, self) };
        if b.covered.0 > a.covered.1 {
            return Err(Error::Coverage {
                lo: a.covered.1,
                hi: b.covered.0,
                cov_lo: a.covered.0,
                cov_hi: a.covered.1,
            });
        }
        let mut ords: Vec<f64> = a.ordinates.clone();
        ords.extend(b.ordinates.iter().filter(|&&g| g > a.covered.1));
        Ok(ZeroTable {
            ordinates: ords,
            covered: (a.covered.0, a.covered.1.max(b.covered.1)),
            source: if a.source == b.source { a.source } else { ZeroSource::Imported },
            base_count: a.base_count,
            base_certified: a.base_certified,
        })
    }
}

/// Root of `Z` in `[a, b]` (opposite signs) to a bracket of width `REFINE_WIDTH`.
///
/// Illinois steps first; once the iterate stalls the bracket is confirmed by
/// a sign probe, with plain bisection as the fallback.
fn refine(mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..60 {
        if b - a <= REFINE_WIDTH {
            return 0.5 * (a + b);
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = hardy_z_unchecked(c);
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        // probe a tight bracket around the latest iterate
        if b - a > REFINE_WIDTH && (c - a).min(b - c) < 0.25 * REFINE_WIDTH {
            let lo = (c - 0.45 * REFINE_WIDTH).max(a);
            let hi = (c + 0.45 * REFINE_WIDTH).min(b);
            let (flo, fhi) = (hardy_z_unchecked(lo), hardy_z_unchecked(hi));
            if (flo > 0.0) != (fhi > 0.0) {
                return 0.5 * (lo + hi);
            }
        }
    }
    while b - a > REFINE_WIDTH {
        let m = 0.5 * (a + b);
        let fm = hardy_z_unchecked(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Minimize `sign · Z` on `[a, b]` by golden section; returns the argmin and value.
fn golden_min(a: f64, b: f64, sign: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * hardy_z_unchecked(c);
    let mut fd = sign * hardy_z_unchecked(d);
    for _ in 0..40 {
        if fc < 0.0 {
            return (c, fc);
        }
        if fd < 0.0 {
            return (d, fd);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * hardy_z_unchecked(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * hardy_z_unchecked(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// All zeros of `Z` in `(t_min, t_max]`: grid sign changes at step
/// `GRID_STEP`, a local-minimum search for close pairs the grid straddles,
/// refinement to `REFINE_WIDTH`, and a counting-function completeness check.
pub fn find_zeros(t_min: f64, t_max: f64) -> Result<ZeroTable> {
    if !(t_min >= 0.0) || !(t_max > t_min) {
        return Err(Error::Domain(format!("need 0 <= t_min < t_max, got [{t_min}, {t_max}]")));
    }
    if t_max > T_MAX {
        return Err(Error::UnsupportedRange(format!("zero search supports t <= {T_MAX:e}")));
    }
    let steps = ((t_max - t_min) / GRID_STEP).ceil() as usize;
    let h = (t_max - t_min) / steps as f64;
    let z = hardy_z_grid(t_min, h, steps + 1)?;
    let at = |j: usize| if j == steps { t_max } else { t_min + j as f64 * h };

    // brackets: (a, b, Z(a), Z(b))
    let mut brackets = Vec::new();
    let mut dips = Vec::new();
    for j in 0..steps {
        if (z[j] > 0.0) != (z[j + 1] > 0.0) {
            brackets.push((at(j), at(j + 1), z[j], z[j + 1]));
        } else if j > 0 && (z[j - 1] > 0.0) == (z[j] > 0.0) && z[j].abs() < z[j - 1].abs() && z[j].abs() < z[j + 1].abs()
        {
            dips.push(j);
        }
    }
    // close pairs hiding between grid points
    let pairs: Vec<[(f64, f64, f64, f64); 2]> = dips
        .par_iter()
        .filter_map(|&j| {
            let sign = z[j].signum();
            let (a, b) = (at(j - 1), at(j + 1));
            let (m, fm) = golden_min(a, b, sign);
            if fm < 0.0 {
                let zm = sign * fm;
                Some([(a, m, z[j - 1], zm), (m, b, zm, z[j + 1])])
            } else {
                None
            }
        })
        .collect();
    for p in pairs {
        // replace nothing: dips never overlap a sign-change interval
        brackets.extend(p);
    }
    brackets.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ordinates: Vec<f64> = brackets.par_iter().map(|&(a, b, fa, fb)| refine(a, b, fa, fb)).collect();
    ordinates.sort_by(f64::total_cmp);
    ordinates.dedup_by(|x, y| (*x - *y).abs() < REFINE_WIDTH);
    if t_min == 0.0 {
        // Z has no zeros below the first ordinate near 14.13
        ordinates.retain(|&g| g > 0.0);
    }

    let (base_count, base_certified) = if t_min == 0.0 { (0, true) } else { (estimate_base(&ordinates, t_min, t_max), false) };
    let table = ZeroTable {
        ordinates,
        covered: (t_min, t_max),
        source: ZeroSource::Computed,
        base_count,
        base_certified,
    };
    check_complete(&table)?;
    Ok(table)
}

/// Zeros below `t_min` estimated from the counting function.
fn estimate_base(ords: &[f64], t_min: f64, t_max: f64) -> usize {
    let samples = 101;
    let mut est: Vec<f64> = (0..samples)
        .map(|i| {
            let t = t_min + (t_max - t_min) * (i as f64 + 0.5) / samples as f64;
            let local = ords.partition_point(|&g| g < t) as f64;
            smooth_count(t) - local
        })
        .collect();
    est.sort_by(f64::total_cmp);
    est[samples / 2].round().max(0.0) as usize
}

fn check_complete(table: &ZeroTable) -> Result<()> {
    let (lo, hi) = table.covered;
    let mut worst = (0.0, lo);
    let samples = 100;
    for i in 0..=samples {
        let t = lo + (hi - lo) * i as f64 / samples as f64;
        let d = (table.count_below(t) as f64 - smooth_count(t)).abs();
        if d > worst.0 {
            worst = (d, t);
        }
    }
    if worst.0 > COUNT_SLACK {
        let t = worst.1;
        return Err(Error::IncompleteZeros {
            found: table.count_below(t),
            expected: smooth_count(t),
            detail: format!("largest mismatch {:.2} at t = {t:.3}", worst.0),
        });
    }
    Ok(())
}

/// `S(t) = N(t) - θ(t)/π - 1` with the left limit at ordinates.
pub fn s_of_t(t: f64, zeros: &ZeroTable) -> Result<f64> {
    zeros.require(t, t)?;
    Ok(zeros.count_below(t) as f64 - theta(t) / std::f64::consts::PI - 1.0)
}

/// One ordinate per line, shortest round-trip decimal, with `#` header lines
/// recording coverage and the base count.
pub fn write_zeros(path: &Path, table: &ZeroTable) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# covered {} {}", table.covered.0, table.covered.1);
    let _ = writeln!(s, "# base_count {}", table.base_count);
    for g in &table.ordinates {
        let _ = writeln!(s, "{g}");
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

/// Read a zeros file and re-verify every ordinate as a sign change of `Z`.
///
/// Without a `# covered` header the coverage is `[0, last ordinate]`.
pub fn read_zeros(path: &Path) -> Result<ZeroTable> {
    let f = std::fs::File::open(path)?;
    let mut ords = Vec::new();
    let mut covered = None;
    let mut base = None;
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["covered", lo, hi] => {
                    let lo: f64 = lo.parse().map_err(|e| parse_err(i, e))?;
                    let hi: f64 = hi.parse().map_err(|e| parse_err(i, e))?;
                    covered = Some((lo, hi));
                }
                ["base_count", n] => base = Some(n.parse::<usize>().map_err(|e| parse_err(i, e))?),
                _ => {}
            }
            continue;
        }
        let g: f64 = line.parse().map_err(|e| parse_err(i, e))?;
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Parse { line: i + 1, msg: format!("ordinate must be positive, got {g}") });
        }
        if let Some(&prev) = ords.last() {
            if g <= prev {
                return Err(Error::Parse { line: i + 1, msg: "ordinates must be strictly ascending".into() });
            }
        }
        ords.push(g);
    }
    let covered = covered.unwrap_or((0.0, ords.last().copied().unwrap_or(0.0)));
    if covered.1 > T_MAX {
        return Err(Error::UnsupportedRange("zeros file extends beyond 1e7".into()));
    }
    let bad: Vec<f64> = ords
        .par_iter()
        .copied()
        .filter(|&g| {
            let d = 1e-6;
            (hardy_z_unchecked(g - d) > 0.0) == (hardy_z_unchecked(g + d) > 0.0)
        })
        .collect();
    if let Some(g) = bad.first() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("{} imported ordinates are not sign changes of Z (first: {g})", bad.len()),
        });
    }
    let (base_count, base_certified) = match base {
        Some(b) => (b, covered.0 == 0.0),
        None if covered.0 == 0.0 => (0, true),
        None => (estimate_base(&ords, covered.0, covered.1), false),
    };
    let table = ZeroTable {
        ordinates: ords,
        covered,
        source: ZeroSource::Imported,
        base_count,
        base_certified,
    };
    if covered.1 > covered.0 {
        check_complete(&table)?;
    }
    Ok(table)
}

fn parse_err(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse { line: line + 1, msg: e.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIRST: [f64; 3] = [14.13472514173469379, 21.022039638771554993, 25.010857580145688763];

    #[test]
    fn first_zeros() {
        let t = find_zeros(0.0, 30.0).unwrap();
        assert_eq!(t.len(), 3);
        for (g, want) in t.ordinates().iter().zip(FIRST) {
            assert!((g - want).abs() < 1e-8, "{g} vs {want}");
        }
        assert!(t.base_certified());
    }

    #[test]
    fn count_to_100() {
        let t = find_zeros(0.0, 100.0).unwrap();
        assert_eq!(t.len(), 29);
        assert_eq!(smooth_count(100.0).round() as usize, 29);
    }

    #[test]
    fn empty_interval() {
        let t = find_zeros(50.0, 50.1).unwrap();
        assert!(t.is_empty());
        assert!(!t.base_certified());
        // ten zeros lie below 50; a short window only pins this down to ±1
        assert!((9..=11).contains(&t.base_count()));
    }

    #[test]
    fn s_jumps_by_one() {
        let t = find_zeros(0.0, 60.0).unwrap();
        let g = t.ordinates()[0];
        let below = s_of_t(g - 1e-7, &t).unwrap();
        let above = s_of_t(g + 1e-7, &t).unwrap();
        assert!((below - above + 1.0).abs() < 1e-5);
        // left limit at the ordinate itself
        assert!((s_of_t(g, &t).unwrap() - below).abs() < 1e-5);
        assert!(s_of_t(61.0, &t).is_err());
    }

    #[test]
    fn offset_table_merges() {
        let a = find_zeros(0.0, 200.0).unwrap();
        let b = find_zeros(100.0, 200.0).unwrap();
        assert_eq!(b.base_count(), a.count_below(100.0));
        let c = find_zeros(0.0, 100.0).unwrap().merge(&b).unwrap();
        assert_eq!(c.len(), a.len());
        for (x, y) in c.ordinates().iter().zip(a.ordinates()) {
            assert!((x - y).abs() < 2e-9);
        }
    }

    #[test]
    fn file_round_trip() {
        let t = find_zeros(0.0, 120.0).unwrap();
        let dir = std::env::temp_dir().join(format!("hz-zeros-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("z.txt");
        write_zeros(&p, &t).unwrap();
        let back = read_zeros(&p).unwrap();
        assert_eq!(back.covered(), t.covered());
        for (a, b) in back.ordinates().iter().zip(t.ordinates()) {
            assert!((a - b).abs() < 1e-9);
        }
        std::fs::write(&p, "14.134725141734694\n21.1\n").unwrap();
        assert!(read_zeros(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
