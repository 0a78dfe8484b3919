//! Runs a figure recipe through the command-line front end and lists the
//! artifacts named in its manifest.
//!
//! `cargo run --release --example recipe -- fig2 /tmp/fig2`

fn main() {
    let mut args = std::env::args().skip(1);
    let figure = args.next().unwrap_or_else(|| "fig5".into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("kagome-am-recipe").display().to_string());

    let status = kagome_am::cli::run_from(["kagome-am", "reproduce", &figure, "--out", &out, "--quiet"]);
    if status != 0 {
        std::process::exit(status);
    }
    let text = std::fs::read_to_string(std::path::Path::new(&out).join("manifest.json")).expect("manifest");
    let manifest: serde_json::Value = serde_json::from_str(&text).expect("manifest json");
    for f in manifest["files"].as_array().into_iter().flatten() {
        println!("{:<40} {:>9} {}", f["path"].as_str().unwrap_or(""), f["bytes"], &f["sha256"].as_str().unwrap_or("")[..12]);
    }
    println!("calibration targets: {}", serde_json::to_string_pretty(&manifest["calibration_targets"]).unwrap());
}
