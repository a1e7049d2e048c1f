//! TGRF binary container for spectral factors and sample batches, and CSV
//! export of batches.
//!
//! All integers and floats are little-endian. Layout:
//!
//! ```text
//! header   "TGRF"  version:u16  payload:u8 (0 factor, 1 batch)  d:u8  N:u64
//!          e0:f64  gamma:f64  h:f64  lambda:f64  nu:f64
//!          scheme:u8 (0 classical, 1 bspline, 2 expsmooth)  kappa:f64  r0:f64  p:u32
//! factor   pd_tol:f64  then N^d eigenvalues:f64 in FFT order
//! batch    seed:u64  stream:u64  count:u64  m:u64
//!          m^d torus flat indices:u64  clamped_mass:f64  factor sha256:[u8; 32]
//!          count * m^d values:f64, one realization after another
//! ```
//!
//! Unused scheme fields are written as zero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::covariance::CovarianceModel;
use crate::cutoff::CutoffSpec;
use crate::sampler::SampleBatch;
use crate::torus::{PeriodizationScheme, SpectralFactor, TorusGrid};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TGRF";
pub const VERSION: u16 = 1;
const PAYLOAD_FACTOR: u8 = 0;
const PAYLOAD_BATCH: u8 = 1;

/// Grid, model and scheme stored in every TGRF header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgrfHeader {
    pub grid: TorusGrid,
    pub model: CovarianceModel,
    pub scheme: PeriodizationScheme,
}

impl TgrfHeader {
    pub fn of(factor: &SpectralFactor) -> Self {
        TgrfHeader {
            grid: factor.grid,
            model: factor.model,
            scheme: factor.scheme,
        }
    }
}

fn write_header(w: &mut impl Write, payload: u8, h: &TgrfHeader) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[payload, h.grid.dim() as u8])?;
    w.write_all(&(h.grid.n() as u64).to_le_bytes())?;
    for v in [h.grid.e0(), h.grid.gamma(), h.grid.h(), h.model.lambda(), h.model.nu()] {
        w.write_all(&v.to_le_bytes())?;
    }
    let (tag, kappa, r0, p) = match h.scheme {
        PeriodizationScheme::Classical => (0u8, 0.0, 0.0, 0u32),
        PeriodizationScheme::Smooth(c @ CutoffSpec::BSpline { kappa, p }) => {
            (1, kappa, c.inner_radius(), p)
        }
        PeriodizationScheme::Smooth(CutoffSpec::ExpSmooth {
            kappa,
            inner_radius,
        }) => (2, kappa, inner_radius, 0),
        PeriodizationScheme::Smooth(CutoffSpec::Classical { .. }) => {
            return Err(Error::Format("classical cutoff inside a smooth scheme".into()))
        }
    };
    w.write_all(&[tag])?;
    w.write_all(&kappa.to_le_bytes())?;
    w.write_all(&r0.to_le_bytes())?;
    w.write_all(&p.to_le_bytes())?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.inner.read_exact(&mut b).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format("file is truncated".into())
            } else {
                e.into()
            }
        })?;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut raw = vec![0u8; count.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?];
        self.inner.read_exact(&mut raw).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format("file is truncated".into())
            } else {
                e.into()
            }
        })?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(Error::Format("trailing bytes after payload".into())),
        }
    }

    fn header(&mut self) -> Result<(u8, TgrfHeader)> {
        if &self.bytes::<4>()? != MAGIC {
            return Err(Error::Format("missing TGRF magic".into()));
        }
        let version = self.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let payload = self.u8()?;
        let d = self.u8()? as usize;
        let n = self.u64()?;
        let e0 = self.f64()?;
        let _gamma = self.f64()?;
        let h = self.f64()?;
        let lambda = self.f64()?;
        let nu = self.f64()?;
        let tag = self.u8()?;
        let kappa = self.f64()?;
        let r0 = self.f64()?;
        let p = self.u32()?;
        let bad = |e: Error| Error::Format(e.to_string());
        let n = usize::try_from(n).map_err(|_| Error::Format(format!("N = {n} too large")))?;
        let grid = TorusGrid::new(d, n, h, e0).map_err(bad)?;
        if (grid.len() as u128) > (1u128 << 34) {
            return Err(Error::Format(format!("grid of {} points is implausible", grid.len())));
        }
        let model = CovarianceModel::new(lambda, nu, d).map_err(bad)?;
        let scheme = match tag {
            0 => PeriodizationScheme::Classical,
            1 => PeriodizationScheme::Smooth(CutoffSpec::bspline(kappa, p).map_err(bad)?),
            2 => PeriodizationScheme::Smooth(CutoffSpec::exp_smooth(kappa, r0).map_err(bad)?),
            t => return Err(Error::Format(format!("unknown scheme tag {t}"))),
        };
        scheme.validate(&grid).map_err(bad)?;
        Ok((payload, TgrfHeader { grid, model, scheme }))
    }
}

/// TGRF encoding of a factor.
pub fn factor_to_bytes(factor: &SpectralFactor) -> Vec<u8> {
    let mut out = Vec::with_capacity(100 + 8 * factor.eigs.len());
    write_factor(&mut out, factor).expect("writing to memory");
    out
}

pub fn write_factor(w: &mut impl Write, factor: &SpectralFactor) -> Result<()> {
    write_header(w, PAYLOAD_FACTOR, &TgrfHeader::of(factor))?;
    w.write_all(&factor.pd_tol.to_le_bytes())?;
    for v in &factor.eigs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_factor(r: impl Read) -> Result<SpectralFactor> {
    let mut rd = Reader { inner: r };
    let (payload, h) = rd.header()?;
    if payload != PAYLOAD_FACTOR {
        return Err(Error::Format(format!("expected a factor payload, found {payload}")));
    }
    let pd_tol = rd.f64()?;
    let eigs = rd.f64s(h.grid.len())?;
    rd.expect_end()?;
    SpectralFactor::from_eigenvalues(eigs, h.grid, h.scheme, h.model, pd_tol)
        .map_err(|e| Error::Format(e.to_string()))
}

/// SHA-256 of the factor's TGRF encoding, lowercase hex.
pub fn factor_digest(factor: &SpectralFactor) -> String {
    hex(&Sha256::digest(factor_to_bytes(factor)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(s: &str) -> Result<[u8; 32]> {
    let mut out = [0u8; 32];
    if s.len() != 64 {
        return Err(Error::Format(format!("digest must be 64 hex digits, got {}", s.len())));
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::Format(format!("bad hex digest {s}")))?;
    }
    Ok(out)
}

/// Writes a batch drawn from a factor with header `h`.
pub fn write_batch(w: &mut impl Write, h: &TgrfHeader, batch: &SampleBatch) -> Result<()> {
    write_header(w, PAYLOAD_BATCH, h)?;
    for v in [batch.seed, batch.stream, batch.count as u64, batch.m as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for &i in &batch.domain_index {
        w.write_all(&(i as u64).to_le_bytes())?;
    }
    w.write_all(&batch.clamped_mass.to_le_bytes())?;
    w.write_all(&unhex(&batch.factor_digest)?)?;
    for v in &batch.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_batch(r: impl Read) -> Result<(TgrfHeader, SampleBatch)> {
    let mut rd = Reader { inner: r };
    let (payload, h) = rd.header()?;
    if payload != PAYLOAD_BATCH {
        return Err(Error::Format(format!("expected a batch payload, found {payload}")));
    }
    let seed = rd.u64()?;
    let stream = rd.u64()?;
    let count = rd.u64()? as usize;
    let m = rd.u64()? as usize;
    if m != h.grid.domain_points_per_axis() {
        return Err(Error::Format(format!(
            "box of {m} points per axis does not match the grid ({})",
            h.grid.domain_points_per_axis()
        )));
    }
    let width = m.pow(h.grid.dim() as u32);
    let mut domain_index = Vec::with_capacity(width);
    for _ in 0..width {
        let i = rd.u64()? as usize;
        if i >= h.grid.len() {
            return Err(Error::Format(format!("domain index {i} outside the torus")));
        }
        domain_index.push(i);
    }
    let clamped_mass = rd.f64()?;
    let digest = hex(&rd.bytes::<32>()?);
    let total = count
        .checked_mul(width)
        .ok_or_else(|| Error::Format("batch size overflow".into()))?;
    let values = rd.f64s(total)?;
    rd.expect_end()?;
    Ok((
        h,
        SampleBatch {
            values,
            count,
            d: h.grid.dim(),
            m,
            domain_index,
            seed,
            stream,
            factor_digest: digest,
            clamped_mass,
        },
    ))
}

/// One row per realization; columns named by signed grid coordinates.
pub fn write_batch_csv(w: &mut impl Write, batch: &SampleBatch) -> Result<()> {
    let half = (batch.m / 2) as i64;
    let mut header = String::from("realization");
    for col in 0..batch.width() {
        let mut r = col;
        let mut c = vec![0i64; batch.d];
        for a in (0..batch.d).rev() {
            c[a] = (r % batch.m) as i64 - half;
            r /= batch.m;
        }
        let name: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        header.push_str(&format!(",n[{}]", name.join(";")));
    }
    writeln!(w, "{header}")?;
    for i in 0..batch.count {
        write!(w, "{i}")?;
        for v in batch.row(i) {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_factor(path: &Path, factor: &SpectralFactor) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut w = BufWriter::new(f);
    write_factor(&mut w, factor)?;
    w.flush().map_err(|e| Error::io_at(path, e))
}

pub fn load_factor(path: &Path) -> Result<SpectralFactor> {
    let f = File::open(path).map_err(|e| Error::io_at(path, e))?;
    read_factor(BufReader::new(f))
}

pub fn save_batch(path: &Path, h: &TgrfHeader, batch: &SampleBatch) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut w = BufWriter::new(f);
    write_batch(&mut w, h, batch)?;
    w.flush().map_err(|e| Error::io_at(path, e))
}

pub fn load_batch(path: &Path) -> Result<(TgrfHeader, SampleBatch)> {
    let f = File::open(path).map_err(|e| Error::io_at(path, e))?;
    read_batch(BufReader::new(f))
}

pub fn save_batch_csv(path: &Path, batch: &SampleBatch) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut w = BufWriter::new(f);
    write_batch_csv(&mut w, batch)?;
    w.flush().map_err(|e| Error::io_at(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{draw, RngStream};
    use crate::torus::SmoothKind;

    fn factors() -> Vec<SpectralFactor> {
        let g = TorusGrid::new(2, 24, 0.125, 0.25).unwrap();
        let m = CovarianceModel::new(0.5, 1.5, 2).unwrap();
        [
            PeriodizationScheme::Classical,
            PeriodizationScheme::smooth_for_grid(&g, SmoothKind::BSpline, 3).unwrap(),
            PeriodizationScheme::smooth_for_grid(&g, SmoothKind::ExpSmooth, 0).unwrap(),
        ]
        .iter()
        .map(|s| SpectralFactor::factorize(&m, &g, s).unwrap())
        .collect()
    }

    #[test]
    fn factor_round_trip() {
        for f in factors() {
            let bytes = factor_to_bytes(&f);
            assert_eq!(&bytes[..4], b"TGRF");
            let back = read_factor(bytes.as_slice()).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn batch_round_trip_and_csv() {
        let f = factors().remove(2);
        let batch = draw(&f, &mut RngStream::new(1, 2), 3).unwrap();
        let mut bytes = Vec::new();
        write_batch(&mut bytes, &TgrfHeader::of(&f), &batch).unwrap();
        let (h, back) = read_batch(bytes.as_slice()).unwrap();
        assert_eq!(back, batch);
        assert_eq!(h, TgrfHeader::of(&f));
        assert_eq!(back.factor_digest, factor_digest(&f));
        let mut csv = Vec::new();
        write_batch_csv(&mut csv, &batch).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("realization,n[-2;-2],n[-2;-1]"));
        let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v.to_bits(), batch.values[0].to_bits());
    }

    #[test]
    fn rejects_corrupt_input() {
        let f = factors().remove(0);
        let bytes = factor_to_bytes(&f);
        assert!(matches!(read_factor(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_factor(bad.as_slice()), Err(Error::Format(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(read_factor(extra.as_slice()).is_err());
        let mut wrong_version = bytes;
        wrong_version[4] = 9;
        assert!(read_factor(wrong_version.as_slice()).is_err());
    }
}
