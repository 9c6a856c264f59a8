pub mod gradient;
pub mod kernel;
pub mod lanczos;
pub mod qgld;
pub mod table1;

use crate::args::{Cli, Command, Format, OutputArgs};
use crate::error::CliResult;
use crate::format::{csv, json};

/// Rendered command output, not yet written anywhere.
pub struct Output {
    pub text: String,
    pub out: Option<std::path::PathBuf>,
}

fn format_of(o: &OutputArgs, default: Format) -> Format {
    o.format.unwrap_or(default)
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    let (text, output) = match &cli.command {
        Command::Gradient(a) => {
            let rows = gradient::gradient_rows(a)?;
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => csv(&gradient::HEADER, &rows.iter().map(|r| r.cells()).collect::<Vec<_>>())?,
                Format::Json => json(&rows),
            };
            (text, &a.output)
        }
        Command::ReproduceTable1(a) => {
            let rows = table1::table1_rows()?;
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => csv(&table1::HEADER, &rows.iter().map(|r| r.cells()).collect::<Vec<_>>())?,
                Format::Json => json(&rows),
            };
            (text, &a.output)
        }
        Command::Qgld(a) => {
            let text = match &a.sweep {
                Some(ls) => {
                    let rows = qgld::qgld_sweep(a, ls)?;
                    match format_of(&a.output, Format::Csv) {
                        Format::Csv => csv(&qgld::SWEEP_HEADER, &rows.iter().map(|r| r.cells()).collect::<Vec<_>>())?,
                        Format::Json => json(&rows),
                    }
                }
                None => {
                    let report = qgld::qgld_report(a)?;
                    match format_of(&a.output, Format::Json) {
                        Format::Json => json(&report),
                        Format::Csv => csv(
                            &["total"],
                            &[vec![report.total().into()]],
                        )?,
                    }
                }
            };
            (text, &a.output)
        }
        Command::Lanczos(a) => {
            let trace = lanczos::lanczos_trace(a)?;
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => csv(&lanczos::HEADER, &trace.rows.iter().map(|r| r.cells()).collect::<Vec<_>>())?,
                Format::Json => json(&trace),
            };
            (text, &a.output)
        }
        Command::KernelDemo(a) => {
            let demo = kernel::kernel_demo(a)?;
            let text = match format_of(&a.output, Format::Json) {
                Format::Json => json(&demo),
                Format::Csv => csv(&kernel::HEADER, &demo.rows())?,
            };
            (text, &a.output)
        }
    };
    Ok(Output {
        text,
        out: output.out.clone(),
    })
}
