pub mod rates;
pub mod simulate;
pub mod sweep;
pub mod verify;
