use crate::gate::Owner;

use super::trace::FrameRecord;

/// Frames breaking the safety invariant: a violation while the mitigator
/// drives, or a violation under the ADS that is not answered by a takeover
/// on the next frame with that next frame clean.
pub fn check_eq8(frames: &[FrameRecord]) -> usize {
    frames
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.violations.is_empty())
        .filter(|(i, f)| match f.owner {
            Owner::Mitigator => true,
            Owner::Ads => !frames.get(i + 1).is_some_and(|next| {
                next.decision.is_some_and(|d| d.takeover_triggered) && next.violations.is_empty()
            }),
        })
        .count()
}
