pub mod align;
pub mod analyze;
pub mod c;
pub mod classify;
pub mod codegen;
pub mod compdb;
pub mod lex;
pub mod pp;
pub mod props;
pub mod report;
