//! Command-line front end: `qfc fig2|fig3|fig4|custom [flags]`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eit_qfc::cli::{parse_config, CliError, Quantity, Settings, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "qfc",
    about = "EIT-based resonant four-wave-mixing frequency conversion sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Probe transmittance and conversion efficiency against optical depth.
    Fig2,
    /// Fidelity against conversion efficiency.
    Fig3,
    /// Output quadrature variances against conversion efficiency.
    Fig4,
    /// Optical-depth sweep with arbitrary medium parameters and input state.
    Custom,
}

#[derive(Args, Default)]
struct Flags {
    /// key = value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Upper end of the optical-depth grid (default 400).
    #[arg(long, global = true)]
    alpha_max: Option<String>,
    /// Number of grid points (default 401 for α sweeps, 101 for CE sweeps).
    #[arg(long, global = true)]
    grid_points: Option<String>,
    /// Input state for `custom`.
    #[arg(long, global = true, value_parser = ["fock", "coherent", "squeezed"])]
    state: Option<String>,
    /// Photon number of the Fock input (default 1).
    #[arg(long, global = true)]
    fock_n: Option<String>,
    /// Mean photon number of the coherent input (default 1).
    #[arg(long, global = true)]
    nbar: Option<String>,
    /// Squeezing in dB (default: variance ratio 4, about 6.02 dB).
    #[arg(long, global = true)]
    squeeze_db: Option<String>,
    /// Multiplies reported variances; 2 gives vacuum = 0.5.
    #[arg(long, global = true, value_parser = ["1", "2"])]
    convention_scale: Option<String>,
    /// fig4 panel: a (squeezed input) or b (single photon).
    #[arg(long, global = true, value_parser = ["a", "b"])]
    variant: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Coupling Rabi frequency, `re` or `re,im`, units of Γ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_c: Option<String>,
    /// Driving Rabi frequency, `re` or `re,im`, units of Γ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_d: Option<String>,
    /// Decay rate of the |3⟩–|1⟩ coherence.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma31: Option<String>,
    /// Decay rate of the |4⟩–|1⟩ coherence.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma41: Option<String>,
    /// Ground-state dephasing rate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma21: Option<String>,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("alpha-max", &self.alpha_max);
        put("grid-points", &self.grid_points);
        put("state", &self.state);
        put("fock-n", &self.fock_n);
        put("nbar", &self.nbar);
        put("squeeze-db", &self.squeeze_db);
        put("convention-scale", &self.convention_scale);
        put("variant", &self.variant);
        put("omega-c", &self.omega_c);
        put("omega-d", &self.omega_d);
        put("gamma31", &self.gamma31);
        put("gamma41", &self.gamma41);
        put("gamma21", &self.gamma21);
        if let Some(p) = &self.out {
            m.insert("out".into(), p.display().to_string());
        }
        m
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let settings = Settings::resolve(&file, &cli.flags.overrides())?;
    let quantity = match cli.command {
        Command::Fig2 => Quantity::Fig2,
        Command::Fig3 => Quantity::Fig3,
        Command::Fig4 if settings.variant == 'b' => Quantity::Fig4b,
        Command::Fig4 => Quantity::Fig4a,
        Command::Custom => Quantity::Custom,
    };
    let spec = settings.sweep(quantity)?;
    let csv = spec.run()?.to_csv();
    match &spec.output_path {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
