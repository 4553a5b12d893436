use thiserror::Error;

use super::FrameFeature;

#[derive(Debug, Error, PartialEq)]
pub enum SmoothError {
    #[error("half window must be non-negative, got {0}")]
    NegativeWindow(i64),
    #[error("cannot smooth an empty series")]
    Empty,
}

/// Triangular moving average.
///
/// Offset `o` within the window gets weight `half_window + 1 - |o|`; windows
/// are clipped at the series edges and renormalized.
pub fn triangular_smooth(series: &[f64], half_window: i64) -> Result<Vec<f64>, SmoothError> {
    if half_window < 0 {
        return Err(SmoothError::NegativeWindow(half_window));
    }
    if series.is_empty() {
        return Err(SmoothError::Empty);
    }
    let h = half_window as usize;
    let n = series.len();
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h).min(n - 1);
            let (mut acc, mut norm) = (0.0, 0.0);
            for (j, &x) in series.iter().enumerate().take(hi + 1).skip(lo) {
                let w = (h + 1 - i.abs_diff(j)) as f64;
                acc += w * x;
                norm += w;
            }
            acc / norm
        })
        .collect();
    Ok(out)
}

/// Smooths face occupancy and head pose over one subject's frame series.
///
/// A frame counts as present when its smoothed occupancy is at least 0.5.
/// Frames dropped by a detection glitch inherit the emotion of the nearest
/// originally-present frame; isolated false detections are cleared.
pub fn smooth_frames(frames: &[FrameFeature], half_window: i64) -> Result<Vec<FrameFeature>, SmoothError> {
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let occupancy: Vec<f64> = frames
        .iter()
        .map(|f| if f.face_present { 1.0 } else { 0.0 })
        .collect();
    let occupancy = triangular_smooth(&occupancy, half_window)?;
    let yaw = triangular_smooth(&frames.iter().map(|f| f.yaw).collect::<Vec<_>>(), half_window)?;
    let pitch = triangular_smooth(&frames.iter().map(|f| f.pitch).collect::<Vec<_>>(), half_window)?;
    let roll = triangular_smooth(&frames.iter().map(|f| f.roll).collect::<Vec<_>>(), half_window)?;

    let h = half_window as usize;
    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let mut f = frame.clone();
        f.yaw = yaw[i];
        f.pitch = pitch[i];
        f.roll = roll[i];
        let present = occupancy[i] >= 0.5;
        if present && !frame.face_present {
            let donor = (1..=h).find_map(|d| {
                let before = i.checked_sub(d).and_then(|j| frames[j].emotion);
                let after = frames.get(i + d).and_then(|f| f.emotion);
                before.or(after)
            });
            f.set_emotion(donor);
        } else if !present && frame.face_present {
            f.set_emotion(None);
        }
        out.push(f);
    }
    Ok(out)
}

/// Marks frames whose head points down past `pitch_down_deg` as obscured.
pub fn apply_occlusion_rule(frames: &mut [FrameFeature], pitch_down_deg: f64) {
    for f in frames.iter_mut() {
        if f.face_present && f.pitch < -pitch_down_deg {
            f.set_emotion(None);
        }
    }
}
