//! The published ten-exchange sharing table used as the reference experiment:
//! who asked whom, for which terrorist code, what the target held, and what
//! it shared. Categories are the leading five characters of a code.

/// One reference exchange.
#[derive(Clone, Debug)]
pub struct Table1Row {
    pub source: &'static str,
    pub target: &'static str,
    pub code: &'static str,
    /// The target holds the ten decimal items `first_item ..= first_item+9`.
    pub first_item: u32,
    pub shared: &'static [u32],
}

// Row 2 as published lists "20" inside a share drawn from {21..30}; that is a
// typo for 30 (the index decomposition then matches the 98Let permutation
// exactly), and the corrected value is carried here.
const ROWS: [Table1Row; 10] = [
    Table1Row { source: "CIA", target: "FBI", code: "98LetT1", first_item: 11, shared: &[16, 13, 15, 18, 12, 11, 19, 20, 14] },
    Table1Row { source: "ISI", target: "CIA", code: "98LetT2", first_item: 21, shared: &[26, 23, 25, 28, 22, 21, 29, 30, 24] },
    Table1Row { source: "RAW", target: "CIA", code: "03AlqT3", first_item: 31, shared: &[37, 34, 38, 35] },
    Table1Row { source: "RAW", target: "FBI", code: "06TalT4", first_item: 41, shared: &[49, 42, 46, 44, 48] },
    Table1Row { source: "CIA", target: "RAW", code: "98LetT5", first_item: 51, shared: &[56, 53, 55, 58, 52, 51, 59, 60] },
    Table1Row { source: "RAW", target: "CIA", code: "06TalT6", first_item: 61, shared: &[69, 62, 66] },
    Table1Row { source: "FBI", target: "RAW", code: "98LetT7", first_item: 71, shared: &[76, 73, 75, 78, 72, 71] },
    Table1Row { source: "ISI", target: "FBI", code: "03AlqT8", first_item: 81, shared: &[87, 84, 88, 85, 89] },
    Table1Row { source: "CIA", target: "FBI", code: "06TalT9", first_item: 91, shared: &[99, 92, 96, 94] },
    Table1Row { source: "ISI", target: "FBI", code: "98LetT8", first_item: 81, shared: &[86, 83, 85, 88, 82, 81, 89, 90] },
];

pub fn rows() -> &'static [Table1Row] {
    &ROWS
}

impl Table1Row {
    pub fn category(&self) -> &'static str {
        &self.code[..5]
    }

    /// Trust level equals the number of items shared.
    pub fn trust_level(&self) -> u8 {
        self.shared.len() as u8
    }

    pub fn available_items(&self) -> Vec<Vec<u8>> {
        (self.first_item..self.first_item + 10)
            .map(|v| v.to_string().into_bytes())
            .collect()
    }

    pub fn shared_items(&self) -> Vec<Vec<u8>> {
        self.shared.iter().map(|v| v.to_string().into_bytes()).collect()
    }
}
