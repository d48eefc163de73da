mod common;

use proptest::prelude::*;

use common::{random_concept, random_document, seeded, small_signature};
use dkbv::document::{emit_dkb, parse_dkb};
use dkbv::report::{ReportDocument, RunOptions, VerdictRecord};
use dkbv::syntax::parse_concept;
use dkbv_core::tasks::{check_unique_hit, table_dkb, TaskOptions};

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let d = random_document(&mut seeded(seed));
        let text = emit_dkb(&d);
        let again = parse_dkb(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&again, &d);
        prop_assert_eq!(emit_dkb(&again), text);
    }

    #[test]
    fn concepts_round_trip(seed in any::<u64>()) {
        let sig = small_signature();
        let c = random_concept(&mut seeded(seed), &sig, 3);
        let text = c.to_string();
        let again = parse_concept(&text, &sig).map_err(|e| TestCaseError::fail(format!("{e} in {text}")))?;
        prop_assert_eq!(again, c);
    }

    #[test]
    fn reports_round_trip(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let shape = common::random_shape(&mut rng);
        let t = common::random_table(&mut rng, "T", &shape);
        let v = check_unique_hit(&table_dkb(t), "T", &TaskOptions::default()).unwrap();
        let rec = VerdictRecord::new(&v, [("table".to_string(), "T".to_string())].into(), std::time::Duration::from_micros(seed % 10_000));
        let opts = RunOptions { no_ontology: false, closure_limit: 4096, today: None };
        let doc = ReportDocument::new("x.dkb", b"text", opts, vec![rec]);
        let again: ReportDocument = serde_json::from_str(&doc.to_json()).unwrap();
        prop_assert_eq!(again, doc);
    }
}
