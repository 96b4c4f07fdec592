//! Generate a planted-signal dataset and inspect its ground truth.

use appdemog::synth::{bayes_accuracy, generate, SynthConfig};
use appdemog::Attribute;

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("paper-scale")?, 1)?;
    let summary = data.dataset.summary();
    println!(
        "{} users, {} apps, {:.1} apps/user (dropped {} apps, {} users)",
        summary.users, summary.apps, summary.mean_apps_per_user, data.truth.dropped_apps, data.truth.dropped_users
    );
    for attribute in Attribute::ALL {
        let truth = data.truth.attribute(attribute);
        let strongest = truth.strongest(3);
        let bayes = bayes_accuracy(&data.truth, attribute, 10_000, 2)?;
        println!(
            "{:<9} {} signal apps, bayes {:.3}, strongest {:?}",
            attribute.name(),
            truth.signal.len(),
            bayes.accuracy,
            strongest.iter().map(|s| (&data.dataset.app_names[s.app], (s.delta * 100.0).round() / 100.0)).collect::<Vec<_>>()
        );
    }
    Ok(())
}
