pub mod eval;
pub mod export;
pub mod oracle;
pub mod train;
