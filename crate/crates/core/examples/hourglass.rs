//! Rescaled maximal flow and cut-region distance on the hourglass as n grows.

use fppflow::capacity::LawSpec;
use fppflow::continuum::{cut_convergence, ExperimentSpec};
use fppflow::cylinder::NuTable;
use fppflow::geometry::shapes;

fn main() -> fppflow::Result<()> {
    let spec = shapes::hourglass();
    let law = LawSpec::constant(1);
    let chamber = shapes::hourglass_left_chamber();
    let nu = NuTable::constant(2, 1.0);
    let x = ExperimentSpec {
        domain: &spec,
        law: &law,
        n_list: &[8, 16, 32, 64],
        replicates: 1,
        master_seed: 0,
        reference: Some(&chamber),
        nu: Some(&nu),
        timing: false,
    };
    let report = cut_convergence(&x)?;
    report.write_csv(std::io::stdout())?;
    eprintln!("capa(left chamber) = {:?}", report.capa_ref);
    Ok(())
}
