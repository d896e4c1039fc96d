#![no_main]
use libfuzzer_sys::fuzz_target;
use maglat::units::{parse_quantity, Dimension, FreqConvention, Unit};

const DIMS: [Dimension; 8] = [
    Dimension::Energy,
    Dimension::Length,
    Dimension::Field,
    Dimension::Mass,
    Dimension::Speed,
    Dimension::Current,
    Dimension::CurrentDensity,
    Dimension::Dimensionless,
];

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    for dim in DIMS {
        for conv in [FreqConvention::Angular, FreqConvention::Cycle] {
            if let Ok(v) = parse_quantity(s, dim, conv) {
                assert!(!v.is_nan());
            }
        }
    }
    if let Some(u) = Unit::parse(s.trim(), FreqConvention::Angular) {
        let again = Unit::parse(u.symbol(), FreqConvention::Angular).unwrap();
        assert_eq!(again.to_base(), u.to_base());
    }
});
