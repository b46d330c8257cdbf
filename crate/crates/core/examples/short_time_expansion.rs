//! B/D element variances and the truncation order of the short-time series.
//!
//!     cargo run --release --example short_time_expansion -- [N] [ensembles]

use rmtmix::short_time::{short_time_check, ShortTimeSettings};

fn main() -> rmtmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map_or(128, |a| a.parse().expect("N"));
    let mut settings = ShortTimeSettings::new(n);
    if let Some(m) = args.next() {
        settings.ensembles = m.parse().expect("ensemble count");
    }
    let r = short_time_check(&settings)?;
    println!("N = {}, {} ensembles", r.dimension, r.ensembles);
    for (name, c) in [
        ("<B_nn^2>", r.b_diagonal),
        ("<B_nm^2>", r.b_off_diagonal),
        ("<D_nm^2>", r.d_off_diagonal),
    ] {
        println!(
            "{name}  {:.6} +- {:.6}  target {:.3}  z = {:+.2}",
            c.estimate,
            c.stderr,
            c.target,
            c.z_score()
        );
    }
    println!("exact finite-N <D_nm^2> = {:.6}", r.d_exact_variance);
    println!(
        "per-ensemble D variance  {:.6} +- {:.6}",
        r.d_block_estimate.0, r.d_block_estimate.1
    );
    println!("mean B_nm = {:.2e} +- {:.2e}", r.b_mean.0, r.b_mean.1);
    println!("truncation error slope (N = {}): {:.3}", r.order.dimension, r.order.slope);
    for (t, e) in r.order.times.iter().zip(&r.order.errors) {
        println!("  t = {t:.3e}  err = {e:.3e}");
    }
    Ok(())
}
