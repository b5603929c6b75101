//! Trust-scored disclosure: how many items are shared is the trust level,
//! and the order they are drawn in is a fixed per-category permutation
//! reconstructed from the published sharing table.

use std::collections::BTreeMap;

/// A per-category permutation of item indices 0..=9. The first `level`
/// usable entries decide which items are disclosed, and in what order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SelectionOrder {
    permutation: Vec<usize>,
}

impl SelectionOrder {
    pub fn new(permutation: Vec<usize>) -> Result<SelectionOrder, String> {
        let mut seen = [false; 10];
        if permutation.len() != 10 {
            return Err(format!("expected 10 indices, got {}", permutation.len()));
        }
        for &i in &permutation {
            if i >= 10 || seen[i] {
                return Err(format!("not a permutation of 0..=9: {permutation:?}"));
            }
            seen[i] = true;
        }
        Ok(SelectionOrder { permutation })
    }

    pub fn indices(&self) -> &[usize] {
        &self.permutation
    }
}

/// Takes the first `level` usable permutation indices and maps them through
/// `items`. Indices beyond `items.len()` are skipped, so the result length is
/// `min(level, items.len())`. Level 0 discloses nothing.
pub fn select_shared(items: &[Vec<u8>], level: u8, order: &SelectionOrder) -> Vec<Vec<u8>> {
    order
        .permutation
        .iter()
        .filter(|&&i| i < items.len())
        .take(level as usize)
        .map(|&i| items[i].clone())
        .collect()
}

/// One observed sharing-table row: the full item list a target held and the
/// subset it actually shared, for some category.
#[derive(Clone, Debug)]
pub struct ObservedRow {
    pub category: String,
    pub available: Vec<Vec<u8>>,
    pub shared: Vec<Vec<u8>>,
}

/// Reconstructs one selection order per category from observed rows.
///
/// Each row's shared list is decomposed into indices of its available list;
/// all rows of a category must be prefixes of a single permutation. Positions
/// never observed are appended in ascending index order, which makes the
/// completion deterministic.
pub fn derive_orders(rows: &[ObservedRow]) -> Result<BTreeMap<String, SelectionOrder>, String> {
    let mut prefixes: BTreeMap<String, Vec<usize>> = BTreeMap::new();

    for row in rows {
        if row.available.len() != 10 {
            return Err(format!(
                "category {}: expected 10 available items, got {}",
                row.category,
                row.available.len()
            ));
        }
        let mut indices = Vec::with_capacity(row.shared.len());
        for item in &row.shared {
            let idx = row
                .available
                .iter()
                .position(|a| a == item)
                .ok_or_else(|| {
                    format!(
                        "category {}: shared item {:?} not among available items",
                        row.category,
                        String::from_utf8_lossy(item)
                    )
                })?;
            if indices.contains(&idx) {
                return Err(format!("category {}: duplicate shared item", row.category));
            }
            indices.push(idx);
        }

        let prefix = prefixes.entry(row.category.clone()).or_default();
        let overlap = prefix.len().min(indices.len());
        if prefix[..overlap] != indices[..overlap] {
            return Err(format!(
                "category {}: rows disagree on a single permutation ({:?} vs {:?})",
                row.category, prefix, indices
            ));
        }
        if indices.len() > prefix.len() {
            *prefix = indices;
        }
    }

    prefixes
        .into_iter()
        .map(|(category, mut prefix)| {
            for i in 0..10 {
                if !prefix.contains(&i) {
                    prefix.push(i);
                }
            }
            SelectionOrder::new(prefix).map(|order| (category, order))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table1;

    fn decimal_items(range: std::ops::RangeInclusive<u32>) -> Vec<Vec<u8>> {
        range.map(|v| v.to_string().into_bytes()).collect()
    }

    fn table1_orders() -> BTreeMap<String, SelectionOrder> {
        let rows: Vec<ObservedRow> = table1::rows()
            .iter()
            .map(|r| ObservedRow {
                category: r.category().to_string(),
                available: r.available_items(),
                shared: r.shared_items(),
            })
            .collect();
        derive_orders(&rows).unwrap()
    }

    // Frozen expected permutations, decomposed by hand from the sharing table
    // (row 1: 16 is items[5], 13 is items[2], ...), tails ascending.
    #[test]
    fn derived_permutations_match_hand_decomposition() {
        let orders = table1_orders();
        assert_eq!(orders["98Let"].indices(), &[5, 2, 4, 7, 1, 0, 8, 9, 3, 6]);
        assert_eq!(orders["03Alq"].indices(), &[6, 3, 7, 4, 8, 0, 1, 2, 5, 9]);
        assert_eq!(orders["06Tal"].indices(), &[8, 1, 5, 3, 7, 0, 2, 4, 6, 9]);
    }

    #[test]
    fn table_rows_reproduce_exactly() {
        let orders = table1_orders();
        for row in table1::rows() {
            let order = &orders[row.category()];
            let shared = select_shared(&row.available_items(), row.trust_level(), order);
            assert_eq!(shared, row.shared_items(), "row {}", row.code);
        }
    }

    #[test]
    fn known_row_values() {
        let orders = table1_orders();
        let shared = select_shared(&decimal_items(11..=20), 9, &orders["98Let"]);
        let expected: Vec<Vec<u8>> = ["16", "13", "15", "18", "12", "11", "19", "20", "14"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        assert_eq!(shared, expected);

        let shared = select_shared(&decimal_items(31..=40), 4, &orders["03Alq"]);
        let expected: Vec<Vec<u8>> = ["37", "34", "38", "35"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        assert_eq!(shared, expected);

        let shared = select_shared(&decimal_items(61..=70), 3, &orders["06Tal"]);
        let expected: Vec<Vec<u8>> = ["69", "62", "66"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        assert_eq!(shared, expected);
    }

    #[test]
    fn level_zero_shares_nothing() {
        let orders = table1_orders();
        assert!(select_shared(&decimal_items(11..=20), 0, &orders["98Let"]).is_empty());
    }

    #[test]
    fn monotone_prefix_and_subset() {
        let orders = table1_orders();
        let items = decimal_items(11..=20);
        for order in orders.values() {
            let mut prev: Vec<Vec<u8>> = Vec::new();
            for level in 0..=10u8 {
                let shared = select_shared(&items, level, order);
                assert_eq!(shared.len(), (level as usize).min(items.len()));
                assert!(shared.starts_with(&prev));
                for item in &shared {
                    assert_eq!(shared.iter().filter(|i| *i == item).count(), 1);
                    assert!(items.contains(item));
                }
                prev = shared;
            }
        }
    }

    #[test]
    fn short_item_lists_skip_out_of_range_indices() {
        let orders = table1_orders();
        let items = decimal_items(11..=14); // only 4 items
        let shared = select_shared(&items, 10, &orders["98Let"]);
        // Usable indices of [5,2,4,7,1,0,8,9,3,6] below 4: 2, 1, 0, 3.
        let expected: Vec<Vec<u8>> = ["13", "12", "11", "14"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        assert_eq!(shared, expected);
    }

    #[test]
    fn inconsistent_rows_fail_derivation() {
        let available = decimal_items(11..=20);
        let rows = vec![
            ObservedRow {
                category: "98Let".into(),
                available: available.clone(),
                shared: vec![b"16".to_vec(), b"13".to_vec()],
            },
            ObservedRow {
                category: "98Let".into(),
                available,
                shared: vec![b"11".to_vec(), b"13".to_vec()],
            },
        ];
        assert!(derive_orders(&rows).is_err());
    }
}
