//! SVG rendering of trajectories as polylines of box centers.

use std::fmt::Write as _;
use std::io::Cursor;

use base64::Engine as _;
use image::{GrayImage, ImageFormat};
use shadowtrack_core::{FrameRef, Trajectory};

/// Stroke color of a trajectory id: hues spaced by the golden angle.
pub fn color(id: u32) -> String {
    let hue = (id as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({hue:.1},80%,45%)")
}

fn png_data_uri(frame: &FrameRef<'_>) -> String {
    let pixels: Vec<u8> = frame.data.iter().map(|&v| (v * 255.0).round() as u8).collect();
    let img = GrayImage::from_raw(frame.cols as u32, frame.rows as u32, pixels).expect("frame size");
    let mut png = Vec::new();
    img.write_to(&mut Cursor::new(&mut png), ImageFormat::Png).expect("png encoding to memory");
    format!("data:image/png;base64,{}", base64::engine::general_purpose::STANDARD.encode(png))
}

/// One `<polyline>` per trajectory over an optional grayscale frame.
/// Without a frame the canvas is `width x height`.
pub fn svg(trajs: &[Trajectory], width: usize, height: usize, background: Option<&FrameRef<'_>>) -> String {
    let (w, h) = background.map_or((width, height), |f| (f.cols, f.rows));
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    match background {
        Some(f) => writeln!(out, r#"<image x="0" y="0" width="{w}" height="{h}" style="image-rendering:pixelated" href="{}"/>"#, png_data_uri(f)).unwrap(),
        None => writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap(),
    }
    let mut sorted: Vec<&Trajectory> = trajs.iter().collect();
    sorted.sort_by_key(|t| t.id());
    for t in sorted {
        let points: Vec<String> = t
            .samples()
            .iter()
            .map(|(_, b)| {
                let c = b.to_center();
                format!("{:.2},{:.2}", c.cx, c.cy)
            })
            .collect();
        writeln!(
            out,
            r#"<polyline data-id="{}" fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            t.id(),
            color(t.id()),
            points.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use shadowtrack_core::BBox;

    #[test]
    fn polylines_per_trajectory() {
        let b = |x| BBox { x, y: 2.0, w: 2.0, h: 2.0 };
        let t = vec![
            Trajectory::new(2, vec![(1, b(0.0)), (2, b(1.0))]).unwrap(),
            Trajectory::new(1, vec![(1, b(5.0))]).unwrap(),
        ];
        let s = svg(&t, 16, 8, None);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains(r#"points="1.00,3.00 2.00,3.00""#));
        assert!(s.find(r#"data-id="1""#) < s.find(r#"data-id="2""#));
        assert_eq!(color(3), color(3));
        assert_ne!(color(1), color(2));

        let data = vec![0.5f32; 12];
        let f = FrameRef::new(3, 4, &data).unwrap();
        let s = svg(&t, 0, 0, Some(&f));
        assert!(s.contains(r#"width="4" height="3""#) && s.contains("data:image/png;base64,"));
    }
}
