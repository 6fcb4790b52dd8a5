use tqd_core::correlator::detector_responses;
use tqd_core::{
    correlate, estimate_direction, Boundary, ChannelPair, Direction, Error, Field, Variant,
};

/// ON blob `[0.5, 1, 0.5]` on row 3 of a 7×7 field, centred at column `cx`.
fn blob(cx: usize) -> Field {
    let mut f = Field::zeros(7, 7);
    f.set(cx - 1, 3, 0.5);
    f.set(cx, 3, 1.0);
    f.set(cx + 1, 3, 0.5);
    f
}

fn pair(on: Field, t: f64) -> ChannelPair {
    let off = Field::zeros(on.width(), on.height());
    ChannelPair { on, off, timestamp: t }
}

#[test]
fn blob_stepping_right_excites_the_rightward_detector() {
    // With a one-frame delay the delayed channel is the previous frame, in
    // which the blob sat one pixel to the left. By hand:
    //   right: 0.5·0.5 + 1·1 + 0.5·0.5 = 1.5
    //   left:  0.5·0.5                 = 0.25
    //   up, down: no vertical overlap  = 0
    let now = pair(blob(3), 0.002);
    let before = pair(blob(2), 0.002);
    let expected = [1.5, 0.0, 0.25, 0.0];
    for d in Direction::ALL {
        let (t4, t5) = correlate(&now, &before, 1, d, Boundary::Replicate).unwrap();
        assert!((t4.sum() - expected[d.index()]).abs() < 1e-15, "{d}");
        assert_eq!(t5.sum(), 0.0);
    }
    let (t4, t5) = detector_responses(&now, &before, 1, Boundary::Replicate, Variant::Classic).unwrap();
    let f = tqd_core::lptc_output(&t4, &t5).unwrap();
    let e = estimate_direction(&f);
    assert_eq!(e.theta, Some(Direction::Right));
    assert_eq!(e.margin, 6.0);
    assert!(!e.tie);
}

#[test]
fn vertical_steps_follow_the_row_convention() {
    // Row indices grow downwards, so a blob moving from row 4 to row 3 moves up.
    let mut now = Field::zeros(5, 7);
    now.set(2, 3, 1.0);
    let mut before = Field::zeros(5, 7);
    before.set(2, 4, 1.0);
    let (now, before) = (pair(now, 0.0), pair(before, 0.0));
    let (t4, _) = correlate(&now, &before, 1, Direction::Up, Boundary::Replicate).unwrap();
    assert_eq!(t4.sum(), 1.0);
    let (t4, _) = correlate(&now, &before, 1, Direction::Down, Boundary::Replicate).unwrap();
    assert_eq!(t4.sum(), 0.0);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let a = pair(blob(3), 0.0);
    let b = pair(Field::zeros(6, 7), 0.0);
    assert!(matches!(
        correlate(&a, &b, 1, Direction::Right, Boundary::Replicate),
        Err(Error::Shape { .. })
    ));
    let c = pair(blob(3), 0.001);
    assert!(matches!(
        correlate(&a, &c, 1, Direction::Right, Boundary::Replicate),
        Err(Error::Contract(_))
    ));
}

#[test]
fn toroidal_boundary_wraps_the_delayed_sample() {
    let mut now = Field::zeros(4, 1);
    now.set(0, 0, 1.0);
    let mut before = Field::zeros(4, 1);
    before.set(3, 0, 1.0);
    let (now, before) = (pair(now, 0.0), pair(before, 0.0));
    let (t4, _) = correlate(&now, &before, 1, Direction::Right, Boundary::Toroidal).unwrap();
    assert_eq!(t4.sum(), 1.0);
    let (t4, _) = correlate(&now, &before, 1, Direction::Right, Boundary::Replicate).unwrap();
    assert_eq!(t4.sum(), 0.0);
}
