//! Ring buffer of velocity fields covering the delay window `[t - tau, t]`.

/// `n_tau + 1` velocity fields, newest at `head`.
///
/// Lag `l` is the field written `l` pushes ago, so with one push per time
/// step lag `n_tau` is the field from exactly `t - tau`. Each slot also
/// carries a caller-supplied scalar (typically `∫ v²`) so window integrals
/// do not need to revisit the fields.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    slots: Vec<f64>,
    norms: Vec<f64>,
    width: usize,
    head: usize,
    n_tau: usize,
    written: usize,
}

impl HistoryBuffer {
    pub fn new(n_tau: usize, width: usize) -> Self {
        Self {
            slots: vec![0.0; (n_tau + 1) * width],
            norms: vec![0.0; n_tau + 1],
            width,
            head: n_tau,
            n_tau,
            written: 0,
        }
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of slots, `n_tau + 1`.
    pub fn capacity(&self) -> usize {
        self.n_tau + 1
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn is_full(&self) -> bool {
        self.written > self.n_tau
    }

    pub fn push(&mut self, field: &[f64], norm: f64) {
        assert_eq!(field.len(), self.width, "history field width mismatch");
        self.head = (self.head + 1) % self.capacity();
        let start = self.head * self.width;
        self.slots[start..start + self.width].copy_from_slice(field);
        self.norms[self.head] = norm;
        self.written += 1;
    }

    fn slot_of(&self, lag: usize) -> usize {
        assert!(lag <= self.n_tau, "lag {lag} beyond delay window {}", self.n_tau);
        assert!(lag < self.written, "history slot at lag {lag} read before it was written");
        (self.head + self.capacity() - lag) % self.capacity()
    }

    /// Field written `lag` pushes ago.
    pub fn lag(&self, lag: usize) -> &[f64] {
        let s = self.slot_of(lag) * self.width;
        &self.slots[s..s + self.width]
    }

    pub fn lag_norm(&self, lag: usize) -> f64 {
        self.norms[self.slot_of(lag)]
    }

    pub fn newest(&self) -> &[f64] {
        self.lag(0)
    }

    /// Per-slot scalars ordered from lag 0 (newest) to lag `n_tau`.
    pub fn norms_by_lag(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_tau).map(move |l| self.lag_norm(l))
    }

    /// Recomputes every slot scalar, e.g. after changing quadrature weights.
    pub fn renorm(&mut self, f: impl Fn(&[f64]) -> f64) {
        for s in 0..self.capacity() {
            let field = &self.slots[s * self.width..(s + 1) * self.width];
            self.norms[s] = f(field);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_exactly_n_tau_back() {
        let mut h = HistoryBuffer::new(3, 2);
        for n in 0..10 {
            h.push(&[n as f64, -(n as f64)], n as f64);
            if n >= 3 {
                assert_eq!(h.lag(3), &[(n - 3) as f64, -((n - 3) as f64)]);
                assert_eq!(h.lag_norm(3), (n - 3) as f64);
            }
            assert_eq!(h.newest()[0], n as f64);
        }
        assert!(h.is_full());
    }

    #[test]
    #[should_panic(expected = "read before it was written")]
    fn rejects_read_before_fill() {
        let mut h = HistoryBuffer::new(4, 1);
        h.push(&[1.0], 0.0);
        let _ = h.lag(2);
    }

    #[test]
    fn zero_delay_keeps_single_slot() {
        let mut h = HistoryBuffer::new(0, 1);
        h.push(&[2.0], 4.0);
        h.push(&[3.0], 9.0);
        assert_eq!(h.capacity(), 1);
        assert_eq!(h.lag(0), &[3.0]);
    }

    proptest! {
        #[test]
        fn round_trip_at_full_lag(
            n_tau in 1usize..12,
            fields in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..60),
        ) {
            let mut h = HistoryBuffer::new(n_tau, 3);
            for (n, v) in fields.iter().enumerate() {
                h.push(v, n as f64);
                for lag in 0..=n_tau.min(n) {
                    let expect = &fields[n - lag];
                    // bit-exact copy
                    prop_assert!(h.lag(lag).iter().zip(expect).all(|(a, b)| a.to_bits() == b.to_bits()));
                }
            }
        }
    }
}
