//! Jitter-averaged HOM visibility and dip width against the jitter ratio.

use homsync::hom_engine::{average_visibility, dip_fwhm, total_timing_jitter, JitterRatio};
use homsync::wavepacket::{coherence_time, Spectrum};

fn main() -> homsync::Result<()> {
    println!("r_j    V");
    for i in 0..=10 {
        let r = 0.5 * i as f64;
        println!("{r:<5.1}  {:.4}", average_visibility(JitterRatio::from_ratio(r)?));
    }

    let coherence = coherence_time(&Spectrum::new(1548.0, 30.0)?);
    let jitter = total_timing_jitter(29.0, 29.0, 27.0);
    let ratio = JitterRatio::new(jitter, coherence)?;
    println!(
        "coherence {coherence:.1} ps, jitter {jitter:.1} ps: r_j = {:.3}, V = {:.4}, dip FWHM {:.1} ps",
        ratio.r_j(),
        average_visibility(ratio),
        dip_fwhm(coherence, jitter)?
    );
    Ok(())
}
