use std::fmt;

/// Fixed-length bit string packed LSB-first into 64-bit words. Bits past
/// `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PackedBits {
    words: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.set(i, true);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn xor_count(&self, other: &PackedBits) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn and_count(&self, other: &PackedBits) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// LSB-first byte serialization, padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.words[i / 8] >> ((i % 8) * 8)) as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut out = Self::zeros(len);
        for i in 0..len {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }
}

impl fmt::Debug for PackedBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "PackedBits({s})")
    }
}

/// Binary feature map stored height-major, then width, then channel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryTensor {
    width: usize,
    height: usize,
    channels: usize,
    bits: PackedBits,
}

impl BinaryTensor {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, bits: PackedBits::zeros(width * height * channels) }
    }

    pub fn from_bits(width: usize, height: usize, channels: usize, bits: PackedBits) -> Self {
        assert_eq!(bits.len(), width * height * channels, "bit count must equal W·H·C");
        Self { width, height, channels, bits }
    }

    pub fn from_fn(width: usize, height: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut t = Self::zeros(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    if f(x, y, c) {
                        t.set(x, y, c, true);
                    }
                }
            }
        }
        t
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> bool {
        self.bits.get(self.index(x, y, c))
    }

    /// Zero outside the map (padding).
    #[inline]
    pub fn get_padded(&self, x: isize, y: isize, c: usize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.get(x as usize, y as usize, c)
        }
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, value: bool) {
        let i = self.index(x, y, c);
        self.bits.set(i, value);
    }

    pub fn bits(&self) -> &PackedBits {
        &self.bits
    }

    pub fn into_bits(self) -> PackedBits {
        self.bits
    }
}

impl fmt::Debug for BinaryTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryTensor({}x{}x{}, ones={})", self.width, self.height, self.channels, self.bits.count_ones())
    }
}
