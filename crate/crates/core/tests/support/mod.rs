#![allow(dead_code)]

pub mod concrete;
pub mod elim_check;
pub mod enumerate;
