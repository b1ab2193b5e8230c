use serde::{Deserialize, Serialize};

/// Fixed-length circular queue of binary hazard flags, addressed by frame
/// index modulo its length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HazardQueue {
    slots: Vec<u8>,
    /// Writes since construction or the last reset, saturating at the length.
    recorded: usize,
}

impl HazardQueue {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "queue length must be >= 1");
        Self {
            slots: vec![0; len],
            recorded: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recorded == 0
    }

    pub fn recorded(&self) -> usize {
        self.recorded
    }

    pub fn is_full(&self) -> bool {
        self.recorded == self.slots.len()
    }

    pub fn write(&mut self, frame: u64, flag: bool) {
        let len = self.slots.len();
        self.slots[(frame % len as u64) as usize] = u8::from(flag);
        self.recorded = (self.recorded + 1).min(len);
    }

    pub fn get(&self, frame: u64) -> u8 {
        self.slots[(frame % self.slots.len() as u64) as usize]
    }

    pub fn popcount(&self) -> usize {
        self.slots.iter().filter(|&&s| s == 1).count()
    }

    /// True iff the queue holds a full window of recorded entries, all ones.
    pub fn all_ones(&self) -> bool {
        self.is_full() && self.slots.iter().all(|&s| s == 1)
    }

    /// True iff the queue holds a full window of recorded entries, all zeros.
    pub fn all_zeros(&self) -> bool {
        self.is_full() && self.slots.iter().all(|&s| s == 0)
    }

    /// Marks every entry unset.
    pub fn reset(&mut self) {
        self.slots.iter_mut().for_each(|s| *s = 0);
        self.recorded = 0;
    }

    /// Recorded entries oldest first, given the frame of the latest write.
    pub fn ordered(&self, last_frame: u64) -> Vec<u8> {
        let n = self.recorded as u64;
        (0..n)
            .map(|k| self.get(last_frame + 1 + k - n))
            .collect()
    }

    pub fn slots(&self) -> &[u8] {
        &self.slots
    }
}
