use fbar::container::{decode_bytes, encode, ContainerError, FbarContainer, Mode, HEADER_LEN};
use fbar::layers::{layer1_encode, layer4_collapse};
use fbar::IndicatorSideband;
use proptest::prelude::*;

#[test]
fn header_fields() {
    let bytes = encode(b"abc", Mode::Channels).to_bytes();
    assert_eq!(&bytes[..4], b"FBAR");
    assert_eq!(bytes[4], 0x01);
    assert_eq!(bytes[5], 0);
    assert_eq!(u64::from_le_bytes(bytes[6..14].try_into().unwrap()), 24);
    assert_eq!(
        u32::from_le_bytes(bytes[14..18].try_into().unwrap()),
        crc32fast::hash(b"abc")
    );
}

#[test]
fn collapsed_payload_is_first_bits_then_sideband() {
    // 'P' = 01 01 00 00 -> collapsed 0000, rising pairs at 0 and 1
    let bytes = encode(b"P", Mode::Collapsed).to_bytes();
    let payload = &bytes[HEADER_LEN..];
    assert_eq!(payload[0], 0x00);
    let sideband = IndicatorSideband::parse(&payload[1..]).unwrap();
    assert_eq!(sideband.to_string(), "{0:/, 1:/}");
}

#[test]
fn rejects_foreign_and_truncated_input() {
    assert!(matches!(decode_bytes(b"GIF89a"), Err(ContainerError::BadMagic { .. })));
    let bytes = encode(b"Philip Baback", Mode::Collapsed).to_bytes();
    let cut = &bytes[..bytes.len() - 2];
    assert!(matches!(
        FbarContainer::from_bytes(cut),
        Err(ContainerError::TruncatedPayload { .. })
    ));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(
        FbarContainer::from_bytes(&extra),
        Err(ContainerError::TrailingBytes { .. })
    ));
}

proptest! {
    #[test]
    fn both_modes_round_trip(data in proptest::collection::vec(any::<u8>(), 0..512)) {
        for mode in [Mode::Channels, Mode::Collapsed] {
            let c = encode(&data, mode);
            prop_assert_eq!(c.mode(), mode);
            let bytes = c.to_bytes();
            prop_assert_eq!(bytes.len(), c.encoded_len());
            prop_assert_eq!(decode_bytes(&bytes).unwrap(), data.clone());
        }
    }

    #[test]
    fn collapsed_size_identity(data in proptest::collection::vec(any::<u8>(), 0..512)) {
        let stream = layer4_collapse(&layer1_encode(&data)).unwrap();
        let bytes = encode(&data, Mode::Collapsed).to_bytes();
        prop_assert_eq!(
            bytes.len(),
            HEADER_LEN + (4 * data.len()).div_ceil(8) + stream.sideband.serialized_len()
        );
    }
}
