//! Thin indirection over rayon so everything also builds sequentially
//! without the `parallel` feature. All call sites produce bit-identical
//! results in either mode: work items are independent and reductions are
//! order-insensitive (max).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Splits `data` into consecutive mutable chunks at `offsets`, which must
/// start at 0, be non-decreasing and end at `data.len()`.
pub(crate) fn split_at_offsets<'a, T>(
    mut data: &'a mut [T],
    offsets: &[usize],
) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(offsets.len().saturating_sub(1));
    for w in offsets.windows(2) {
        let (head, tail) = data.split_at_mut(w[1] - w[0]);
        out.push(head);
        data = tail;
    }
    debug_assert!(data.is_empty());
    out
}

#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk<T, F>(chunks: Vec<&mut [T]>, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    chunks
        .into_par_iter()
        .enumerate()
        .for_each(|(i, chunk)| f(i, chunk));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk<T, F>(chunks: Vec<&mut [T]>, f: F)
where
    F: Fn(usize, &mut [T]),
{
    for (i, chunk) in chunks.into_iter().enumerate() {
        f(i, chunk);
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk_with<T, U, F>(chunks: Vec<&mut [T]>, out: &mut [U], f: F)
where
    T: Send,
    U: Send,
    F: Fn(usize, &mut [T], &mut U) + Sync,
{
    chunks
        .into_par_iter()
        .zip(out.par_iter_mut())
        .enumerate()
        .for_each(|(i, (chunk, slot))| f(i, chunk, slot));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk_with<T, U, F>(chunks: Vec<&mut [T]>, out: &mut [U], f: F)
where
    F: Fn(usize, &mut [T], &mut U),
{
    for (i, (chunk, slot)) in chunks.into_iter().zip(out.iter_mut()).enumerate() {
        f(i, chunk, slot);
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_covers_everything_once() {
        let mut data = [0u32; 10];
        let offsets = [0usize, 3, 3, 7, 10];
        let chunks = split_at_offsets(&mut data, &offsets);
        assert_eq!(chunks.iter().map(|c| c.len()).collect::<Vec<_>>(), [3, 0, 4, 3]);
        for_each_chunk(chunks, |i, chunk| {
            for x in chunk.iter_mut() {
                *x = i as u32 + 1;
            }
        });
        assert_eq!(data, [1, 1, 1, 3, 3, 3, 3, 4, 4, 4]);
    }

    #[test]
    fn map_indexed_preserves_order() {
        assert_eq!(map_indexed(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
