use clap::Parser;

fn main() {
    let cli = mtjsim_cli::Cli::parse();
    match mtjsim_cli::run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("mtjsim: error: {msg}");
            std::process::exit(1);
        }
    }
}
