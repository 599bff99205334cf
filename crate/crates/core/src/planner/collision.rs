use crate::geometry::ContinuousPoint;
use crate::gridmap::GridMap;

/// True iff no obstacle pixel's closed unit square touches the segment `[a, b]`.
///
/// Supercover traversal: for every pixel column the segment crosses, the segment's
/// y-extent inside that column selects the rows it touches. Pixels outside the map are
/// ignored.
pub fn obstacle_free(map: &GridMap, a: ContinuousPoint, b: ContinuousPoint) -> bool {
    let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
    let dx = hi.x - lo.x;
    let first_col = lo.x.ceil() as i64 - 1;
    let last_col = hi.x.floor() as i64;
    for col in first_col.max(0)..=last_col.min(map.width() as i64 - 1) {
        let (x0, x1) = ((col as f64).max(lo.x), ((col + 1) as f64).min(hi.x));
        if x0 > x1 {
            continue;
        }
        let (y0, y1) = if dx == 0.0 {
            (lo.y.min(hi.y), lo.y.max(hi.y))
        } else {
            let at = |x: f64| lo.y + (x - lo.x) * (hi.y - lo.y) / dx;
            let (p, q) = (at(x0), at(x1));
            (p.min(q), q.max(p))
        };
        let first_row = y0.ceil() as i64 - 1;
        let last_row = y1.floor() as i64;
        for row in first_row.max(0)..=last_row.min(map.height() as i64 - 1) {
            if map.is_obstacle_at(col as isize, row as isize) {
                return false;
            }
        }
    }
    true
}

/// Returns `to` when it is within `step` of `from`, otherwise the point at distance
/// exactly `step` along the segment.
pub fn steer(from: ContinuousPoint, to: ContinuousPoint, step: f64) -> ContinuousPoint {
    let d = from.distance(&to);
    if d <= step {
        return to;
    }
    let s = step / d;
    ContinuousPoint::new(from.x + (to.x - from.x) * s, from.y + (to.y - from.y) * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::{CellClass, CellIndex};

    fn p(x: f64, y: f64) -> ContinuousPoint {
        ContinuousPoint::new(x, y)
    }

    fn map_with(obstacles: &[(usize, usize)], w: usize, h: usize) -> GridMap {
        let mut cells = vec![CellClass::Free; w * h];
        for &(x, y) in obstacles {
            cells[y * w + x] = CellClass::Obstacle;
        }
        GridMap::new(w, h, cells, CellIndex::new(0, 0), CellIndex::new(w - 1, h - 1)).unwrap()
    }

    #[test]
    fn degenerate_segment_in_free_pixel() {
        let m = map_with(&[(3, 3)], 8, 8);
        assert!(obstacle_free(&m, p(1.5, 1.5), p(1.5, 1.5)));
        assert!(!obstacle_free(&m, p(3.5, 3.5), p(3.5, 3.5)));
    }

    #[test]
    fn crossing_one_pixel_column() {
        let m: GridMap = map_with(&(0..8).map(|y| (4, y)).collect::<Vec<_>>(), 8, 8);
        assert!(!obstacle_free(&m, p(0.5, 2.5), p(7.5, 2.5)));
        assert!(obstacle_free(&m, p(0.5, 2.5), p(3.5, 2.5)));
        // Touching the obstacle's closed boundary counts as contact.
        assert!(!obstacle_free(&m, p(0.5, 2.5), p(4.0, 2.5)));
    }

    #[test]
    fn vertical_and_reversed_segments() {
        let m = map_with(&[(2, 5)], 8, 8);
        assert!(!obstacle_free(&m, p(2.5, 0.5), p(2.5, 7.5)));
        assert!(!obstacle_free(&m, p(2.5, 7.5), p(2.5, 0.5)));
        assert!(obstacle_free(&m, p(1.5, 7.5), p(1.5, 0.5)));
        assert_eq!(
            obstacle_free(&m, p(6.5, 6.5), p(0.5, 3.5)),
            obstacle_free(&m, p(0.5, 3.5), p(6.5, 6.5))
        );
    }

    #[test]
    fn diagonal_through_corner_touches_both_neighbours() {
        let m = map_with(&[(1, 0)], 4, 4);
        assert!(!obstacle_free(&m, p(0.5, 0.5), p(1.5, 1.5)));
    }

    #[test]
    fn steer_cases() {
        assert_eq!(steer(p(0.0, 0.0), p(3.0, 4.0), 10.0), p(3.0, 4.0));
        let s = steer(p(0.0, 0.0), p(30.0, 40.0), 10.0);
        assert!((s.x - 6.0).abs() < 1e-12 && (s.y - 8.0).abs() < 1e-12);
        assert_eq!(steer(p(2.0, 2.0), p(2.0, 2.0), 1.0), p(2.0, 2.0));
    }
}
