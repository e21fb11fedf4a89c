//! Level-parallel helpers. Work is split per vertical level and reduced in
//! level order, so results do not depend on the thread count.

use crate::grid::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn levels_mut<F>(data: &mut [C64], nm: usize, f: F)
where
    F: Fn(usize, &mut [C64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(nm).enumerate().for_each(|(j, c)| f(j, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(nm).enumerate().for_each(|(j, c)| f(j, c));
}

pub fn map_levels<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}
