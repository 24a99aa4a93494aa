use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} outside {min}..={max}")]
    IndexOutOfRange { index: usize, min: usize, max: usize },
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },
    #[error("symbol {symbol} outside alphabet 1..={sigma}")]
    SymbolOutOfRange { symbol: u64, sigma: u64 },
    #[error("cell width {0} outside 1..=64")]
    InvalidWidth(u32),
    #[error("alphabet size {0} must be at least 2")]
    InvalidAlphabet(u64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_index(index: usize, min: usize, max: usize) -> Result<()> {
    if index < min || index > max {
        Err(Error::IndexOutOfRange { index, min, max })
    } else {
        Ok(())
    }
}
