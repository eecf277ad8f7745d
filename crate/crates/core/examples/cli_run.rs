//! Runs every bundled configuration through the command-line entry point and
//! prints the status of each report.

use std::path::Path;

use hardylab::report::Report;

fn main() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let out = tempfile::tempdir().expect("temporary directory");
    let mut entries: Vec<_> = std::fs::read_dir(&configs).expect("configs directory").flatten().map(|e| e.path()).collect();
    entries.sort();
    for path in entries {
        let text = std::fs::read_to_string(&path).unwrap();
        let command = text.lines().find_map(|l| l.strip_prefix("command = ")).unwrap().trim_matches('"').to_string();
        if command == "diagnose" && path.to_string_lossy().contains("torus") {
            continue; // about half a minute; run it through the binary instead
        }
        let dir = out.path().join(path.file_stem().unwrap());
        let args = ["hardylab", &command, "--config", path.to_str().unwrap(), "--out", dir.to_str().unwrap()];
        let code = hardylab::cli::main_with_args(args);
        let report = Report::parse(&std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap();
        println!("{:<28} exit {code}  {}", path.file_name().unwrap().to_string_lossy(), report.status);
    }
}
