//! Serialize filters to the binary image format and load them back.
//!
//! Run with `cargo run --example filter_images`.

use msfilter::codec;
use msfilter::worked_example;
use msfilter::{AssociationFilter, ShiftMode, ShiftingFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut f = ShiftingFilter::new(1 << 12, 5, 8, ShiftMode::WordBounded(64), 3)?;
    for i in 0..200u32 {
        f.insert(&i.to_le_bytes(), (i % 8 + 1) as usize)?;
    }
    f.seal();
    let image = codec::encode_shifting(&f)?;
    println!("image: {} bytes ({} header)", image.len(), codec::HEADER_LEN);
    println!("header: {}", hex::encode(&image[..codec::HEADER_LEN]));

    let back = codec::decode(&image)?;
    assert_eq!(codec::encode(&back)?, image);
    println!("element 17 -> {}", back.query_text(&17u32.to_le_bytes())?);
    println!(
        "kind {}, {} cells, {} sets",
        back.kind(),
        back.cells(),
        back.set_count()
    );

    let mut w = worked_example::spatial_filter()?;
    w.seal();
    let bytes = codec::encode_spatial(&w)?;
    println!(
        "walkthrough spatial payload: {}",
        hex::encode(&bytes[codec::HEADER_LEN..])
    );

    let mut corrupt = image.clone();
    corrupt[0] = b'X';
    println!("corrupted magic: {}", codec::decode(&corrupt).unwrap_err());
    println!("truncated: {}", codec::decode(&image[..image.len() - 1]).unwrap_err());
    Ok(())
}
