//! Small dense polynomial helpers over `Z/mZ`, constant term first.

/// Remainder of `a` modulo the monic polynomial `m`, coefficients mod `modulus`.
pub(crate) fn rem_monic(a: &mut Vec<u64>, m: &[u64], modulus: u64) {
    let deg = m.len() - 1;
    while a.len() > deg {
        let lead = a.pop().unwrap() % modulus;
        if lead == 0 {
            continue;
        }
        let shift = a.len() - deg;
        for (i, &c) in m[..deg].iter().enumerate() {
            let sub = (lead as u128 * c as u128 % modulus as u128) as u64;
            let slot = &mut a[shift + i];
            *slot = (*slot + modulus - sub) % modulus;
        }
    }
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Whether monic `d` divides `f` over F_p.
fn divides(d: &[u64], f: &[u64], p: u64) -> bool {
    let mut r = f.to_vec();
    rem_monic(&mut r, d, p);
    trim(&mut r);
    r.is_empty()
}

/// Digits of `index` in base `p`, most significant digit first, padded to `len`.
fn digits_msb_first(mut index: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % p;
        index /= p;
    }
    out
}

/// Monic polynomials of degree `k` in ascending order of their coefficient
/// tuple `(c_0, c_1, ..., c_{k-1})`, compared lexicographically.
fn monic_in_order(p: u64, k: usize) -> impl Iterator<Item = Vec<u64>> {
    let count = p.pow(k as u32);
    (0..count).map(move |i| {
        let mut f = digits_msb_first(i, p, k);
        f.push(1);
        f
    })
}

pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    if k == 0 {
        return false;
    }
    (1..=k / 2).all(|d| monic_in_order(p, d).all(|g| !divides(&g, f, p)))
}

/// Least monic irreducible of degree `k` over F_p in the tuple order above.
pub(crate) fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    monic_in_order(p, k)
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_irreducibles() {
        assert_eq!(least_irreducible(5, 1), vec![0, 1]);
        // x^2 + x + 1 is the only irreducible quadratic over F_2
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        // x^3 + x^2 + 1 has tuple (1,0,1), below (1,1,0) for x^3 + x + 1
        assert_eq!(least_irreducible(2, 3), vec![1, 0, 1, 1]);
        // over F_3: x^2 + 1 has tuple (1,0), the smallest irreducible
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
    }

    #[test]
    fn quadratic_irreducibility_matches_root_search() {
        for p in [2u64, 3, 5, 7] {
            for c0 in 0..p {
                for c1 in 0..p {
                    let f = [c0, c1, 1];
                    let has_root = (0..p).any(|x| (c0 + c1 * x + x * x) % p == 0);
                    assert_eq!(is_irreducible(&f, p), !has_root, "p={p} f={f:?}");
                }
            }
        }
    }
}
