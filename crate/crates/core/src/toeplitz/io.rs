use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 8] = b"TQMAT01\0";

/// One line per row, `re,im` pairs separated by commas.
pub fn write_csv(m: &CMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for j in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols())
            .map(|k| format!("{:.17e},{:.17e}", m[(j, k)].re, m[(j, k)].im))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Header, dimension as `u64` LE, then row-major `(re, im)` as `f64` LE.
pub fn write_binary(m: &CMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            w.write_all(&m[(j, k)].re.to_le_bytes())?;
            w.write_all(&m[(j, k)].im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<CMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Config(format!(
            "{} is not a matrix file",
            path.display()
        )));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            m[(j, k)] = Complex64::new(re, f64::from_le_bytes(word));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = CMatrix::from_fn(3, 3, |j, k| {
            Complex64::new(j as f64 + 0.1, -(k as f64) / 3.0)
        });
        write_binary(&m, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], MATRIX_MAGIC);
        assert_eq!(bytes.len(), 16 + 9 * 16);
        assert_eq!(read_binary(&path).unwrap(), m);
        write_csv(&m, &dir.path().join("m.csv")).unwrap();
    }
}
