//! Browser demo over the `avd` library. The page builds a nearest-site
//! diagram, deletes the site under a click and can switch to the farthest
//! diagram of the remaining sites. Every operation returns an SVG string.

use avd::deletion::delete_site;
use avd::diagram::{Diagram, Mode};
use avd::fvd::fvd_build;
use avd::gen::generate_general;
use avd::insert::InsertOptions;
use avd::kernel::{Point, SiteIdx, SiteKind, SiteSystem};
use avd::oracle::brute_voronoi;
use avd::svg::diagram_svg;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    sys: SiteSystem,
    active: Vec<SiteIdx>,
    diagram: Diagram,
    seed: u64,
    deleted: u64,
    last_traced: usize,
}

impl Demo {
    pub fn try_new(backend: &str, n: usize, seed: u64) -> Result<Demo, String> {
        let kind = SiteKind::parse(backend).map_err(|e| e.to_string())?;
        let (sys, _) = generate_general(kind, n, seed, None, None).map_err(|e| e.to_string())?;
        let active: Vec<SiteIdx> = (0..sys.len()).collect();
        let diagram = brute_voronoi(&sys, &active, Mode::Nearest).map_err(|e| e.to_string())?;
        Ok(Demo { sys, active, diagram, seed, deleted: 0, last_traced: 0 })
    }

    /// Deletes the active site nearest to `(x, y)`, which is the owner of
    /// the region under the point.
    pub fn try_delete_at(&mut self, x: f64, y: f64) -> Result<String, String> {
        if self.active.len() < 2 {
            return Err("the last site stays".into());
        }
        let z = Point::new(x, y);
        let s = *self
            .active
            .iter()
            .min_by(|&&a, &&b| self.sys.dist(a, z).total_cmp(&self.sys.dist(b, z)))
            .expect("active is non-empty");
        let d = delete_site(&self.sys, &self.diagram, s, self.seed.wrapping_add(self.deleted), InsertOptions::default())
            .map_err(|e| e.to_string())?;
        self.last_traced = d.stats.total_traced();
        self.diagram = d.diagram;
        self.active.retain(|&i| i != s);
        self.deleted += 1;
        Ok(self.svg())
    }

    pub fn try_farthest_svg(&self) -> Result<String, String> {
        let b = fvd_build(&self.sys, &self.active, self.seed, InsertOptions::default()).map_err(|e| e.to_string())?;
        Ok(diagram_svg(&self.sys, &b.diagram))
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(backend: &str, n: usize, seed: u64) -> Result<Demo, JsError> {
        Demo::try_new(backend, n, seed).map_err(|e| JsError::new(&e))
    }

    pub fn svg(&self) -> String {
        diagram_svg(&self.sys, &self.diagram)
    }

    #[wasm_bindgen(js_name = deleteAt)]
    pub fn delete_at(&mut self, x: f64, y: f64) -> Result<String, JsError> {
        self.try_delete_at(x, y).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = farthestSvg)]
    pub fn farthest_svg(&self) -> Result<String, JsError> {
        self.try_farthest_svg().map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = activeCount)]
    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Merge-curve edges traced by the most recent deletion.
    #[wasm_bindgen(js_name = lastTraced)]
    pub fn last_traced(&self) -> usize {
        self.last_traced
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clicks_delete_down_to_one_site() {
        let mut demo = Demo::try_new("euclidean", 8, 5).unwrap();
        let centers: Vec<Point> = (0..8).map(|i| demo.sys.pos(i)).collect();
        for p in &centers[..7] {
            let svg = demo.try_delete_at(p.x, p.y).unwrap();
            assert!(svg.starts_with("<svg"));
        }
        assert_eq!(demo.active_count(), 1);
        assert!(demo.try_delete_at(0.0, 0.0).is_err());
    }

    #[test]
    fn farthest_picture_renders() {
        let demo = Demo::try_new("euclidean", 10, 3).unwrap();
        assert!(demo.try_farthest_svg().unwrap().contains("<polygon"));
    }

    #[test]
    fn unknown_backend_is_an_error() {
        assert!(Demo::try_new("hexagonal", 5, 1).is_err());
    }
}
