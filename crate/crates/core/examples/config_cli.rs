//! Run the command-line front end on an inline config with overrides.

use hysteresis::cli::main_with_args;

const CONFIG: &str = r#"
preset = "duhem"
omegas = [1.0, 0.3, 0.1]

[params]
alpha = 1
"#;

fn main() {
    let dir = std::env::temp_dir().join(format!("hyst-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let config = dir.join("run.toml");
    std::fs::write(&config, CONFIG).expect("write config");

    let out_dir = dir.join("out");
    let args = ["hyst", "hysteresis", "-c", config.to_str().unwrap(), "--set", "params.alpha=-1", "--out", out_dir.to_str().unwrap()];
    let code = main_with_args(args, &mut std::io::stdout(), &mut std::io::stderr());
    println!("exit code {code}");
    if let Ok(report) = std::fs::read_to_string(out_dir.join("report.json")) {
        println!("report.json has {} bytes", report.len());
    }
    let _ = std::fs::remove_dir_all(&dir);
}
