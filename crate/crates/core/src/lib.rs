pub mod linalg;
pub mod poly;
pub mod theta;
pub mod dubrovin;
pub mod solve;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/theta.md")]
    mod theta {}
    #[doc = include_str!("../../../book/src/quartics.md")]
    mod quartics {}
    #[doc = include_str!("../../../book/src/witness.md")]
    mod witness {}
    #[doc = include_str!("../../../book/src/singular.md")]
    mod singular {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
