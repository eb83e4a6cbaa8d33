// Suffix array construction by induced sorting (SA-IS).
//
// The input must end with a unique symbol that is strictly smaller than every
// other symbol (the terminal sentinel). Indices are u32, so inputs are limited
// to u32::MAX - 1 symbols.

const EMPTY: u32 = u32::MAX;

pub(crate) trait Symbol: Copy {
    fn idx(self) -> usize;
}

impl Symbol for u16 {
    #[inline]
    fn idx(self) -> usize {
        self as usize
    }
}

impl Symbol for u32 {
    #[inline]
    fn idx(self) -> usize {
        self as usize
    }
}

/// Builds the suffix array of `s` over the alphabet `[0, alphabet)`.
pub(crate) fn suffix_array<T: Symbol>(s: &[T], alphabet: usize) -> Vec<u32> {
    assert!(
        s.len() < EMPTY as usize,
        "text too long for 32-bit suffix array"
    );
    let mut sa = vec![EMPTY; s.len()];
    sais(s, &mut sa, alphabet);
    sa
}

fn bucket_bounds<T: Symbol>(s: &[T], counts: &mut [u32], alphabet: usize, end: bool) -> Vec<u32> {
    counts.iter_mut().for_each(|c| *c = 0);
    for &c in s {
        counts[c.idx()] += 1;
    }
    let mut bkt = vec![0u32; alphabet];
    let mut sum = 0u32;
    for (b, &c) in bkt.iter_mut().zip(counts.iter()) {
        sum += c;
        *b = if end { sum } else { sum - c };
    }
    bkt
}

#[inline]
fn is_lms(t: &[bool], i: usize) -> bool {
    i > 0 && t[i] && !t[i - 1]
}

fn induce<T: Symbol>(s: &[T], sa: &mut [u32], t: &[bool], counts: &mut [u32], alphabet: usize) {
    let n = s.len();
    let mut bkt = bucket_bounds(s, counts, alphabet, false);
    for i in 0..n {
        let p = sa[i];
        if p != EMPTY && p > 0 {
            let j = (p - 1) as usize;
            if !t[j] {
                let c = s[j].idx();
                sa[bkt[c] as usize] = j as u32;
                bkt[c] += 1;
            }
        }
    }
    let mut bkt = bucket_bounds(s, counts, alphabet, true);
    for i in (0..n).rev() {
        let p = sa[i];
        if p != EMPTY && p > 0 {
            let j = (p - 1) as usize;
            if t[j] {
                let c = s[j].idx();
                bkt[c] -= 1;
                sa[bkt[c] as usize] = j as u32;
            }
        }
    }
}

fn sais<T: Symbol>(s: &[T], sa: &mut [u32], alphabet: usize) {
    let n = s.len();
    match n {
        0 => return,
        1 => {
            sa[0] = 0;
            return;
        }
        _ => {}
    }

    // true = S-type, false = L-type
    let mut t = vec![false; n];
    t[n - 1] = true;
    for i in (0..n - 1).rev() {
        let (a, b) = (s[i].idx(), s[i + 1].idx());
        t[i] = a < b || (a == b && t[i + 1]);
    }

    let mut counts = vec![0u32; alphabet];

    // Stage 1: sort LMS substrings.
    sa.iter_mut().for_each(|x| *x = EMPTY);
    let mut bkt = bucket_bounds(s, &mut counts, alphabet, true);
    for (i, sym) in s.iter().enumerate().skip(1) {
        if is_lms(&t, i) {
            let c = sym.idx();
            bkt[c] -= 1;
            sa[bkt[c] as usize] = i as u32;
        }
    }
    induce(s, sa, &t, &mut counts, alphabet);

    let mut n1 = 0usize;
    for i in 0..n {
        let p = sa[i] as usize;
        if is_lms(&t, p) {
            sa[n1] = p as u32;
            n1 += 1;
        }
    }

    // Name LMS substrings; names land at sa[n1 + pos/2].
    sa[n1..].iter_mut().for_each(|x| *x = EMPTY);
    let mut name = 0u32;
    let mut prev: Option<usize> = None;
    for i in 0..n1 {
        let pos = sa[i] as usize;
        let mut diff = false;
        match prev {
            None => diff = true,
            Some(pv) => {
                for d in 0..n {
                    if pos + d >= n
                        || pv + d >= n
                        || s[pos + d].idx() != s[pv + d].idx()
                        || t[pos + d] != t[pv + d]
                    {
                        diff = true;
                        break;
                    }
                    if d > 0 && (is_lms(&t, pos + d) || is_lms(&t, pv + d)) {
                        break;
                    }
                }
            }
        }
        if diff {
            name += 1;
            prev = Some(pos);
        }
        sa[n1 + pos / 2] = name - 1;
    }
    let mut j = n;
    for i in (n1..n).rev() {
        if sa[i] != EMPTY {
            j -= 1;
            sa[j] = sa[i];
        }
    }

    // Stage 2: order LMS suffixes, recursing when names collide.
    let reduced: Vec<u32> = sa[n - n1..].to_vec();
    {
        let (sa1, _) = sa.split_at_mut(n1);
        if (name as usize) < n1 {
            sais(&reduced, sa1, name as usize);
        } else {
            for (i, &c) in reduced.iter().enumerate() {
                sa1[c as usize] = i as u32;
            }
        }
    }

    // Stage 3: induce the full order from sorted LMS suffixes.
    let mut lms_pos = Vec::with_capacity(n1);
    for i in 1..n {
        if is_lms(&t, i) {
            lms_pos.push(i as u32);
        }
    }
    for i in 0..n1 {
        sa[i] = lms_pos[sa[i] as usize];
    }
    sa[n1..].iter_mut().for_each(|x| *x = EMPTY);
    let mut bkt = bucket_bounds(s, &mut counts, alphabet, true);
    for i in (0..n1).rev() {
        let p = sa[i];
        sa[i] = EMPTY;
        let c = s[p as usize].idx();
        bkt[c] -= 1;
        sa[bkt[c] as usize] = p;
    }
    induce(s, sa, &t, &mut counts, alphabet);
}
