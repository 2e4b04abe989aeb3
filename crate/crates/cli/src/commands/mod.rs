pub mod classify;
pub mod reproduce;
pub mod simulate;
pub mod variation;
