use serde::{Deserialize, Serialize};

/// Root-to-leaf path of one word: `points[j]` is the inner node that emits
/// `bits[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuffmanCode {
    pub bits: Vec<u8>,
    pub points: Vec<u32>,
}

/// Huffman tree over word counts, stored as per-word codes. Inner nodes are
/// numbered `0..len()-1` with the root last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuffmanCoding {
    codes: Vec<HuffmanCode>,
}

impl HuffmanCoding {
    /// Two-queue Huffman construction. On equal weights the leaf queue wins,
    /// which with a descending-count vocabulary makes the tree reproducible.
    pub fn from_counts(counts: &[u64]) -> HuffmanCoding {
        let n = counts.len();
        if n <= 1 {
            return HuffmanCoding {
                codes: vec![
                    HuffmanCode {
                        bits: Vec::new(),
                        points: Vec::new(),
                    };
                    n
                ],
            };
        }
        // leaves sorted by descending count, stable on index
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]));

        // node ids: 0..n are leaves in `order` position, n..2n-1 inner nodes
        let mut weight: Vec<u64> = order.iter().map(|&i| counts[i]).collect();
        weight.resize(2 * n - 1, u64::MAX);
        let mut parent = vec![0usize; 2 * n - 1];
        let mut bit = vec![0u8; 2 * n - 1];

        let mut leaf = n as isize - 1;
        let mut inner = n;
        let take = |weight: &[u64], leaf: &mut isize, inner: &mut usize| -> usize {
            if *leaf >= 0 && weight[*leaf as usize] <= weight[*inner] {
                *leaf -= 1;
                (*leaf + 1) as usize
            } else {
                *inner += 1;
                *inner - 1
            }
        };
        for a in 0..n - 1 {
            let first = take(&weight, &mut leaf, &mut inner);
            let second = take(&weight, &mut leaf, &mut inner);
            weight[n + a] = weight[first].saturating_add(weight[second]);
            parent[first] = n + a;
            parent[second] = n + a;
            bit[second] = 1;
        }

        let root = 2 * n - 2;
        let mut codes = vec![
            HuffmanCode {
                bits: Vec::new(),
                points: Vec::new(),
            };
            n
        ];
        for (pos, &word) in order.iter().enumerate() {
            let mut bits = Vec::new();
            let mut points = Vec::new();
            let mut node = pos;
            while node != root {
                bits.push(bit[node]);
                points.push((parent[node] - n) as u32);
                node = parent[node];
            }
            bits.reverse();
            points.reverse();
            codes[word] = HuffmanCode { bits, points };
        }
        HuffmanCoding { codes }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn inner_nodes(&self) -> usize {
        self.codes.len().saturating_sub(1)
    }

    pub fn code(&self, word: usize) -> &HuffmanCode {
        &self.codes[word]
    }

    /// Count-weighted total code length.
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        self.codes
            .iter()
            .zip(counts)
            .map(|(c, &n)| c.bits.len() as u64 * n)
            .sum()
    }
}
