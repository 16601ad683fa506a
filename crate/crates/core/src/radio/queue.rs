//! Per-user packet buffers.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// One buffered packet: when it arrived and how many bits remain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub arrival_subframe: usize,
    pub remaining_bits: f64,
}

/// FIFO packet buffer of one user. Arrival subframes are nondecreasing
/// and stored packets always hold a positive number of bits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PacketQueue {
    packets: VecDeque<Packet>,
}

impl PacketQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_arrival(&mut self, subframe: usize, bits: f64) {
        if bits <= 0.0 {
            return;
        }
        if let Some(last) = self.packets.back() {
            debug_assert!(last.arrival_subframe <= subframe);
        }
        self.packets.push_back(Packet {
            arrival_subframe: subframe,
            remaining_bits: bits,
        });
    }

    pub fn total_bits(&self) -> f64 {
        self.packets.iter().map(|p| p.remaining_bits).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }

    /// Arrival subframe of the oldest unserved packet.
    pub fn oldest_arrival(&self) -> Option<usize> {
        self.packets.front().map(|p| p.arrival_subframe)
    }

    /// Serves up to `bits`, draining the oldest packets first.
    /// Returns the number of bits actually served.
    pub fn drain(&mut self, bits: f64) -> f64 {
        let mut left = bits.max(0.0);
        let mut served = 0.0;
        while left > 0.0 {
            match self.packets.front_mut() {
                None => break,
                Some(front) => {
                    if front.remaining_bits <= left {
                        left -= front.remaining_bits;
                        served += front.remaining_bits;
                        self.packets.pop_front();
                    } else {
                        front.remaining_bits -= left;
                        served += left;
                        left = 0.0;
                    }
                }
            }
        }
        served
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drain_serves_oldest_first() {
        let mut q = PacketQueue::new();
        q.push_arrival(0, 1000.0);
        q.push_arrival(2, 500.0);
        assert_eq!(q.total_bits(), 1500.0);
        assert_eq!(q.oldest_arrival(), Some(0));

        let served = q.drain(1200.0);
        assert_eq!(served, 1200.0);
        // First packet fully gone, 300 bits of the second remain.
        assert_eq!(q.oldest_arrival(), Some(2));
        assert_eq!(q.total_bits(), 300.0);

        let served = q.drain(1000.0);
        assert_eq!(served, 300.0);
        assert!(q.is_empty());
    }

    #[test]
    fn zero_size_arrivals_are_dropped() {
        let mut q = PacketQueue::new();
        q.push_arrival(0, 0.0);
        assert!(q.is_empty());
    }

    #[test]
    fn partial_drain_keeps_arrival_stamp() {
        let mut q = PacketQueue::new();
        q.push_arrival(3, 45_000.0);
        q.drain(25_000.0);
        assert_eq!(q.oldest_arrival(), Some(3));
        assert_eq!(q.total_bits(), 20_000.0);
    }
}
