use declfix_core::fixtures::{generate_program, MAX_STATEMENTS};
use declfix_core::tokencode::{compose, decompose};
use declfix_core::{build_scopes, deserialize_ast, emit, find_undeclared, parse_source, serialize_ast};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>(), size in 1usize..=MAX_STATEMENTS) {
        let src = generate_program(seed, size);
        let root = parse_source(&src, "gen.c").unwrap();
        let scopes = build_scopes(&root).unwrap();
        prop_assert!(find_undeclared(&root, &scopes).is_empty());

        let json = serialize_ast(&root);
        let back = deserialize_ast(&json).unwrap();
        prop_assert_eq!(&back, &root);
        prop_assert_eq!(serialize_ast(&back), json);

        let text = emit(&root);
        let reparsed = parse_source(&text, "gen.c").unwrap();
        prop_assert_eq!(reparsed.without_coords(), root.without_coords());
        prop_assert_eq!(emit(&reparsed), text);
    }

    #[test]
    fn composite_codes_decompose_exactly(n in 1u64..=47, t in 100_000u64..=999_999) {
        prop_assert_eq!(decompose(compose(n, t)).unwrap(), (n, t));
    }
}
