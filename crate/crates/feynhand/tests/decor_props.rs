//! Property tests for decorations: endpoint fidelity, arrow placement,
//! scaling laws and halo ordering.

use feynhand::decor::{coil_polyline, decorate, wave_polyline, DecorParams, Layer, Shape};
use feynhand::dsl::Span;
use feynhand::geometry::{base_path, CurveSpec, Point};
use feynhand::model::{Config, EdgeOpts, Propagator, PropagatorStyle, Rgb};
use feynhand::units::Length;
use proptest::prelude::*;

fn endpoints() -> impl Strategy<Value = (Point, Point)> {
    (-4.0..4.0f64, -4.0..4.0f64, -4.0..4.0f64, -4.0..4.0f64).prop_filter_map(
        "well separated endpoints",
        |(x0, y0, x1, y1)| {
            let a = Point::new(x0, y0);
            let b = Point::new(x1, y1);
            (a.dist(b) > 0.8).then_some((a, b))
        },
    )
}

fn curve() -> impl Strategy<Value = Option<CurveSpec>> {
    prop_oneof![
        Just(None),
        (0.0..360.0f64, 0.0..360.0f64, 0.7..1.8f64).prop_map(|(out_deg, in_deg, looseness)| {
            Some(CurveSpec {
                out_deg,
                in_deg,
                looseness,
            })
        }),
    ]
}

fn bare_propagator(style: PropagatorStyle, top: bool, arrow_frac: f64) -> Propagator {
    Propagator {
        style,
        from: "a".to_string(),
        to: "b".to_string(),
        color: Rgb::BLACK,
        top,
        arrow_frac,
        edge: EdgeOpts {
            out: None,
            in_: None,
            looseness: 1.0,
            label: None,
        },
        momentum: None,
        insertions: vec![],
        span: Span::default(),
    }
}

proptest! {
    /// Wave and coil polylines start and end exactly on the path endpoints.
    #[test]
    fn decoration_endpoint_fidelity(((from, to), curve) in (endpoints(), curve())) {
        let path = base_path(from, to, curve).unwrap();
        let params = DecorParams::from_config(&Config::default());
        let wave = wave_polyline(&path, params.wave_amp, params.wave_half, Rgb::BLACK, params.linesize);
        prop_assert!(wave.pts[0].dist(from) <= 1e-6);
        prop_assert!(wave.pts.last().unwrap().dist(to) <= 1e-6);
        let coil = coil_polyline(
            &path,
            params.coil_amp,
            params.coil_pitch,
            Rgb::BLACK,
            params.linesize,
            Span::default(),
        )
        .unwrap();
        prop_assert!(coil.pts[0].dist(from) <= 1e-6);
        prop_assert!(coil.pts.last().unwrap().dist(to) <= 1e-6);
    }

    /// The arrow glyph centroid sits on the path at the requested fraction.
    #[test]
    fn arrow_centroid_at_fraction(
        ((from, to), curve) in (endpoints(), curve()),
        frac in 0.05..0.95f64,
    ) {
        let path = base_path(from, to, curve).unwrap();
        let p = bare_propagator(PropagatorStyle::Fermion, false, frac);
        let prims = decorate(&p, &path, &Config::default()).unwrap();
        let Shape::Polygon(glyph) = &prims[1].shape else { panic!("arrow expected") };
        let centroid = glyph
            .pts
            .iter()
            .fold(Point::new(0.0, 0.0), |acc, p| acc + *p)
             * (1.0 / 3.0);
        prop_assert!(centroid.dist(path.point_at(frac).0) <= 1e-6);
    }

    /// Scaling the line size by a power of two scales the derived wave,
    /// coil and momentum parameters bit-exactly.
    #[test]
    fn linesize_scaling_law(pow in -2i32..4) {
        let factor = 2.0f64.powi(pow);
        let base_cfg = Config::default();
        let mut scaled_cfg = Config::default();
        scaled_cfg
            .set_length("linesize", base_cfg.linesize.scaled(factor))
            .unwrap();
        let base = DecorParams::from_config(&base_cfg);
        let scaled = DecorParams::from_config(&scaled_cfg);
        prop_assert_eq!(scaled.wave_amp.as_cm(), base.wave_amp.as_cm() * factor);
        prop_assert_eq!(scaled.wave_half.as_cm(), base.wave_half.as_cm() * factor);
        prop_assert_eq!(scaled.coil_amp.as_cm(), base.coil_amp.as_cm() * factor);
        prop_assert_eq!(scaled.coil_pitch.as_cm(), base.coil_pitch.as_cm() * factor);
        prop_assert_eq!(scaled.mom_width.as_cm(), base.mom_width.as_cm() * factor);
        // Fixed patterns do not scale.
        prop_assert_eq!(scaled.dash_on, base.dash_on);
        prop_assert_eq!(scaled.dash_off, base.dash_off);
        prop_assert_eq!(scaled.dot_off, base.dot_off);
    }

    /// For a `top` propagator the halo comes first and everything sits on
    /// the top layer; otherwise everything is on the main layer.
    #[test]
    fn halo_ordering(
        ((from, to), curve) in (endpoints(), curve()),
        top in any::<bool>(),
        style_idx in 0usize..16,
    ) {
        let style = PropagatorStyle::ALL[style_idx];
        let path = base_path(from, to, curve).unwrap();
        let cfg = Config::default();
        let p = bare_propagator(style, top, 0.5);
        let prims = decorate(&p, &path, &cfg).unwrap();
        prop_assert!(!prims.is_empty());
        if top {
            prop_assert!(prims.iter().all(|pr| pr.layer == Layer::Top));
            let Shape::Polyline(halo) = &prims[0].shape else {
                panic!("halo must be the first primitive")
            };
            prop_assert_eq!(halo.width, cfg.topsep());
            prop_assert_eq!(halo.stroke, cfg.topcolor);
            prop_assert!(halo.dash.is_none());
        } else {
            prop_assert!(prims.iter().all(|pr| pr.layer == Layer::Main));
        }
    }
}

/// Majorana styles carry two opposed arrows; their centroids sit at the
/// 0.3 and 0.7 fractions.
#[test]
fn majorana_arrow_positions() {
    let path = base_path(Point::new(0.0, 0.0), Point::new(2.0, 0.0), None).unwrap();
    let cfg = Config::default();
    for (style, first_reversed) in [
        (PropagatorStyle::Majorana, false),
        (PropagatorStyle::AntiMajorana, true),
    ] {
        let p = bare_propagator(style, false, 0.5);
        let prims = decorate(&p, &path, &cfg).unwrap();
        assert_eq!(prims.len(), 3);
        let centroid = |shape: &Shape| {
            let Shape::Polygon(g) = shape else { panic!() };
            g.pts.iter().fold(Point::new(0.0, 0.0), |acc, p| acc + *p) * (1.0 / 3.0)
        };
        let c1 = centroid(&prims[1].shape);
        let c2 = centroid(&prims[2].shape);
        assert!(c1.dist(path.point_at(0.3).0) < 1e-9);
        assert!(c2.dist(path.point_at(0.7).0) < 1e-9);
        // Tip direction flips between the two kinds.
        let Shape::Polygon(g1) = &prims[1].shape else {
            panic!()
        };
        let tip_dx = g1.pts[0].x - c1.x;
        if first_reversed {
            assert!(tip_dx < 0.0);
        } else {
            assert!(tip_dx > 0.0);
        }
    }
}

/// The length of one full size step: arrow size controls glyph scale.
#[test]
fn arrow_size_follows_config() {
    let path = base_path(Point::new(0.0, 0.0), Point::new(2.0, 0.0), None).unwrap();
    let mut cfg = Config::default();
    cfg.set_length("arrowsize", Length::pt(9.0)).unwrap();
    let p = bare_propagator(PropagatorStyle::Fermion, false, 0.5);
    let prims = decorate(&p, &path, &cfg).unwrap();
    let Shape::Polygon(glyph) = &prims[1].shape else {
        panic!()
    };
    let base_mid = (glyph.pts[1] + glyph.pts[2]) * 0.5;
    assert!((glyph.pts[0].dist(base_mid) - Length::pt(9.0).as_cm()).abs() < 1e-12);
}
