mod common;

use common::*;
use linelod_core::bench::BenchMode;
use linelod_core::raster::{
    decode_png_rgba, heat_color, render_frame, shade_candidates, Background, BackgroundRaster, CameraBasis, FrameSpec, RenderMode, ShadeContext,
};
use linelod_core::{CameraPose, Dataset, Rect};
use rand::seq::SliceRandom;
use rand::Rng;

fn spec(cam: CameraPose, tau: f64, mode: BenchMode) -> FrameSpec {
    let mut s = FrameSpec::new(cam);
    s.tolerance_px = tau;
    s.flags = mode.flags();
    s
}

#[test]
fn candidate_order_does_not_matter() {
    let mut r = rng(31);
    let lines = interlocking_scene(&mut r, 15, 8);
    let styles = uniform_styles(&[(0, 0, 0.8, [200, 20, 20, 255])]);
    let (ds, _) = build_styled(&lines, &styles, true);
    let cam = CameraPose::nadir(5.0, 5.0, 12.0, 0.9, 64, 64);
    let frame = spec(cam, 1.0, BenchMode::Avs);
    let ctx = ShadeContext::new(&frame, &ds);
    let basis = CameraBasis::new(&cam);
    let mut hit = 0;
    for _ in 0..2000 {
        let (px, py) = (r.gen_range(0.0..64.0), r.gen_range(0.0..64.0));
        let q = basis.pixel_to_world(px, py).unwrap();
        let fp = basis.footprint(px, py, &q, &cam);
        let mut ids: Vec<u32> = (0..ds.segments.len() as u32).collect();
        let base = shade_candidates(&q, fp, &ctx, ids.iter().copied());
        ids.shuffle(&mut r);
        let shuffled = shade_candidates(&q, fp, &ctx, ids.iter().copied());
        assert_eq!(base.color, shuffled.color);
        assert_eq!(base.segment, shuffled.segment);
        hit += base.segment.is_some() as u32;
    }
    assert!(hit > 100);
}

#[test]
fn index_descent_finds_every_covering_segment() {
    // Shading from the index path equals shading from all segments.
    let mut r = rng(32);
    let lines = interlocking_scene(&mut r, 15, 8);
    let styles = uniform_styles(&[(0, 0, 0.5, [20, 20, 200, 255])]);
    let (ds, _) = build_styled(&lines, &styles, true);
    for mode in BenchMode::ALL {
        let cam = random_camera(&mut r, &lines);
        let frame = spec(cam, 2.0, mode);
        let ctx = ShadeContext::new(&frame, &ds);
        let basis = CameraBasis::new(&cam);
        let pool: Vec<u32> = if frame.flags.use_all_segments { (0..ds.segments.len() as u32).collect() } else { ds.original_segments.clone() };
        for _ in 0..2000 {
            let (px, py) = (r.gen_range(0.0..cam.viewport_w as f64), r.gen_range(0.0..cam.viewport_h as f64));
            let Some(q) = basis.pixel_to_world(px, py) else { continue };
            let fp = basis.footprint(px, py, &q, &cam);
            let a = linelod_core::raster::shade_fragment(&q, fp, &ctx);
            let b = shade_candidates(&q, fp, &ctx, pool.iter().copied());
            assert_eq!(a.color, b.color, "{mode}");
            assert_eq!(a.segment, b.segment, "{mode}");
        }
    }
}

#[test]
fn original_segments_match_all_segments_at_zero_tolerance() {
    let mut r = rng(33);
    let lines = interlocking_scene(&mut r, 15, 8);
    let styles = uniform_styles(&[(0, 0, 0.4, [0, 0, 0, 255])]);
    let (ds, _) = build_styled(&lines, &styles, true);
    for _ in 0..5 {
        let mut cam = random_camera(&mut r, &lines);
        cam.viewport_w = 128;
        cam.viewport_h = 96;
        let avs = render_frame(&spec(cam, 0.0, BenchMode::Avs), &ds).unwrap();
        let onvs = render_frame(&spec(cam, 0.0, BenchMode::Onvs), &ds).unwrap();
        assert_eq!(avs.rgba, onvs.rgba);
    }
}

#[test]
fn close_zoom_keeps_wide_lines_solid() {
    // A line several pixels wide covers every column at any magnification.
    let styles = uniform_styles(&[(0, 0, 1.0, [0, 0, 0, 255])]);
    let (ds, _) = build_styled(&[line(&[(-50.0, 0.0), (0.0, 0.3), (50.0, 0.0)], 0)], &styles, true);
    for height in [0.5, 2.0, 8.0, 30.0] {
        let cam = CameraPose::nadir(0.0, 0.0, height, 0.9, 80, 80);
        let fp = height * 2.0 * 0.45f64.tan() / 80.0;
        if 1.0 < 3.0 * fp {
            continue;
        }
        let f = render_frame(&spec(cam, 1.0, BenchMode::Avs), &ds).unwrap();
        for x in 0..80 {
            let dark = (0..80).filter(|&y| f.pixel(x, y)[0] == 0).count();
            assert!(dark >= 1, "height {height}: column {x} has no solid pixel");
        }
    }
}

#[test]
fn priority_beats_distance() {
    let styles = uniform_styles(&[(0, 0, 2.0, [255, 0, 0, 255]), (1, 5, 2.0, [0, 0, 255, 255])]);
    let (ds, _) = build_styled(&[line(&[(-10.0, 0.0), (10.0, 0.0)], 0), line(&[(-10.0, 0.6), (10.0, 0.6)], 1)], &styles, true);
    let cam = CameraPose::nadir(0.0, 0.0, 10.0, 0.8, 64, 64);
    let f = render_frame(&FrameSpec::new(cam), &ds).unwrap();
    // The center pixel is nearer the low-priority line but shows the other.
    assert_eq!(f.pixel(32, 32), [0, 0, 255, 255]);
}

#[test]
fn empty_dataset_shows_background_and_cold_heatmap() {
    let (ds, _) = build(&[], true);
    let cam = CameraPose { eye: [0.0, 0.0, 10.0], yaw: 0.0, pitch: 0.3, fov_y: 0.9, viewport_w: 32, viewport_h: 24 };
    let mut s = FrameSpec::new(cam);
    s.background = Background::Color([1, 2, 3, 255]);
    let f = render_frame(&s, &ds).unwrap();
    assert!(f.rgba.chunks(4).all(|c| c == [1, 2, 3, 255]));
    assert_eq!(f.stats.distance_tests, 0);
    s.mode = RenderMode::Heatmap;
    let h = render_frame(&s, &ds).unwrap();
    assert!(h.rgba.chunks(4).all(|c| c == heat_color(0)));
}

#[test]
fn heatmap_counts_match_stats_and_png() {
    let mut r = rng(34);
    let lines = interlocking_scene(&mut r, 15, 8);
    let (ds, _) = build(&lines, true);
    let cam = CameraPose::nadir(5.0, 5.0, 15.0, 0.9, 48, 40);
    let mut s = spec(cam, 1.0, BenchMode::Anvs);
    s.mode = RenderMode::Heatmap;
    let f = render_frame(&s, &ds).unwrap();
    assert_eq!(f.tests.iter().map(|&t| t as u64).sum::<u64>(), f.stats.distance_tests);
    for y in 0..40 {
        for x in 0..48 {
            assert_eq!(f.pixel(x, y), heat_color(f.tests_at(x, y)));
        }
    }
    let csv = f.counts_csv();
    assert_eq!(csv.lines().count(), 40);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 48);
    let (w, h, rgba) = decode_png_rgba(&f.png_bytes()).unwrap();
    assert_eq!((w, h), (48, 40));
    assert_eq!(rgba, f.rgba);
}

#[test]
fn raster_background_is_sampled_under_lines() {
    let mut png = Vec::new();
    linelod_core::raster::encode_png_rgba(&mut png, 2, 1, &[255, 0, 0, 255, 0, 255, 0, 255]).unwrap();
    let bg = BackgroundRaster::from_png(&png, Rect::new(p(-10.0, -10.0), p(10.0, 10.0)), [0, 0, 0, 0]).unwrap();
    let (ds, _) = build(&[], true);
    let mut s = FrameSpec::new(CameraPose::nadir(0.0, 0.0, 5.0, 0.8, 16, 16));
    s.background = Background::Raster(bg);
    let f = render_frame(&s, &ds).unwrap();
    assert_eq!(f.pixel(2, 8), [255, 0, 0, 255]);
    assert_eq!(f.pixel(13, 8), [0, 255, 0, 255]);
}

#[test]
fn invalid_frames_are_rejected() {
    let (ds, _): (Dataset, _) = build(&[], true);
    let mut s = FrameSpec::new(CameraPose::nadir(0.0, 0.0, 5.0, 0.8, 16, 16));
    s.tolerance_px = -1.0;
    assert!(render_frame(&s, &ds).is_err());
    s.tolerance_px = 1.0;
    s.camera.viewport_w = 0;
    assert!(render_frame(&s, &ds).is_err());
    s.camera.viewport_w = 16;
    s.camera.eye[2] = -1.0;
    assert!(render_frame(&s, &ds).is_err());
}
