use carpets::{render_set, CarpetSpec, DEFAULT_ENUM_CAP};

fn main() {
    let spec = CarpetSpec::new(2, 3, [(0, 0), (1, 0), (1, 2)]).unwrap();
    let img = render_set(&spec, 3, 216, DEFAULT_ENUM_CAP).unwrap();
    std::fs::write("/tmp/fig2_rust.pgm", img.to_pgm()).unwrap();
    eprintln!("wrote {} bytes", 15 + img.pixels.len());
}
