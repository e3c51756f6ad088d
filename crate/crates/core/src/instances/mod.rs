pub mod atomicity;
pub mod count;
pub mod crit;
pub mod deadlock;
pub mod lift;
pub mod lock;
pub mod patched;
pub mod product;
pub mod regex;
pub mod trivial;
