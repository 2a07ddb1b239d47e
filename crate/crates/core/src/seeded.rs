//! Schedule-independent randomness: every draw is a pure function of the
//! run seed and a stable item key.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Pseudo-random 64-bit key for `parts` under `seed`. Parts are separated so
/// `["ab", "c"]` and `["a", "bc"]` differ.
pub fn keyed_u64(seed: u64, parts: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        for byte in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    splitmix64(h ^ splitmix64(seed))
}

/// Orders items by their keyed hash, which is a uniformly random
/// permutation for a fixed seed. Ties on the hash fall back to the key.
pub fn shuffle_by_key<T, K: Fn(&T) -> String>(items: &mut [T], seed: u64, key: K) {
    items.sort_by_cached_key(|item| {
        let k = key(item);
        (keyed_u64(seed, &[&k]), k)
    });
}
