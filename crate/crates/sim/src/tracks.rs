//! Track ingestion and synthetic track generators.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use synergy_core::rng_from_seed;

use crate::error::{Result, SimError};

/// Tracks shorter than this are dropped at load time.
pub const MIN_TRACK_POINTS: usize = 20;

const REQUIRED: [&str; 5] = ["track_id", "type", "lon", "lat", "time"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackPoint {
    pub lon: f64,
    pub lat: f64,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub id: String,
    pub kind: String,
    pub points: Vec<TrackPoint>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrackTable {
    pub tracks: Vec<Track>,
}

impl TrackTable {
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Keeps the first `n` tracks.
    pub fn truncated(mut self, n: usize) -> Self {
        self.tracks.truncate(n);
        self
    }
}

/// Result of [`load_tracks`]; drop counts are kept for reporting.
#[derive(Clone, Debug)]
pub struct LoadedTracks {
    pub table: TrackTable,
    pub dropped_short: usize,
    pub dropped_duplicate_times: usize,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| SimError::MissingColumn(name.to_string()))
}

/// Reads `track_id,type,lon,lat,time` rows (extra columns ignored), groups by
/// track id in order of first appearance and sorts each track by time.
///
/// Repeated timestamps within a track keep the first row.
pub fn load_tracks<R: Read>(source: R) -> Result<LoadedTracks> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = REQUIRED.iter().map(|c| column(&headers, c)).collect::<Result<_>>()?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Track> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize| -> Result<&str> {
            rec.get(idx[k]).ok_or_else(|| SimError::Row { line, msg: format!("missing `{}` cell", REQUIRED[k]) })
        };
        let num = |k: usize| -> Result<f64> {
            let s = field(k)?.trim();
            match s.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(SimError::Row { line, msg: format!("cannot parse `{}` value {s:?}", REQUIRED[k]) }),
            }
        };
        let id = field(0)?.trim().to_string();
        let point = TrackPoint { lon: num(2)?, lat: num(3)?, time: num(4)? };
        let track = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Track { id, kind: String::new(), points: Vec::new() }
        });
        if track.kind.is_empty() {
            track.kind = field(1)?.trim().to_string();
        }
        track.points.push(point);
    }
    let mut dropped_short = 0;
    let mut dropped_duplicate_times = 0;
    let mut tracks = Vec::new();
    for id in order {
        let mut t = groups.remove(&id).expect("grouped id");
        t.points.sort_by(|a, b| a.time.total_cmp(&b.time));
        let before = t.points.len();
        t.points.dedup_by(|b, a| a.time == b.time);
        dropped_duplicate_times += before - t.points.len();
        if t.points.len() < MIN_TRACK_POINTS {
            dropped_short += 1;
        } else {
            tracks.push(t);
        }
    }
    if tracks.is_empty() {
        return Err(SimError::EmptyData(format!(
            "no track has at least {MIN_TRACK_POINTS} points ({dropped_short} dropped)"
        )));
    }
    Ok(LoadedTracks { table: TrackTable { tracks }, dropped_short, dropped_duplicate_times })
}

/// [`load_tracks`] from a file; a missing file names the public dataset record.
pub fn load_tracks_path(path: &Path) -> Result<LoadedTracks> {
    if !path.exists() {
        return Err(SimError::DatasetMissing { path: path.display().to_string() });
    }
    load_tracks(std::fs::File::open(path)?)
}

pub fn write_tracks_csv<W: Write>(table: &TrackTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REQUIRED)?;
    for t in &table.tracks {
        for p in &t.points {
            w.write_record([t.id.clone(), t.kind.clone(), p.lon.to_string(), p.lat.to_string(), p.time.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Vehicles circling roundabouts of different sizes, with a slow radius wobble.
///
/// A linear extrapolator of these paths amplifies input noise, so the
/// precision of noise injected during training trades fit sharpness against
/// robustness to measurement noise at evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundaboutGenerator {
    pub n_tracks: usize,
    pub length: usize,
    /// centres uniform on `[-centre_range, centre_range]²`
    pub centre_range: f64,
    pub radius: (f64, f64),
    pub speed: (f64, f64),
    /// relative amplitude of the radius wobble
    pub wobble: f64,
    pub wobble_freq: f64,
}

impl Default for RoundaboutGenerator {
    fn default() -> Self {
        Self {
            n_tracks: 4,
            length: 300,
            centre_range: 20.0,
            radius: (3.0, 5.0),
            speed: (0.3, 0.5),
            wobble: 0.1,
            wobble_freq: 0.013,
        }
    }
}

impl RoundaboutGenerator {
    pub fn generate(&self, seed: u64) -> TrackTable {
        let mut rng = rng_from_seed(seed);
        let tracks = (0..self.n_tracks)
            .map(|k| {
                let cx = rng.random_range(-self.centre_range..=self.centre_range);
                let cy = rng.random_range(-self.centre_range..=self.centre_range);
                let r = rng.random_range(self.radius.0..=self.radius.1);
                let v = rng.random_range(self.speed.0..=self.speed.1);
                let dir = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let omega = dir * v / r;
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let wphase = rng.random_range(0.0..std::f64::consts::TAU);
                let points = (0..self.length)
                    .map(|t| {
                        let t = t as f64;
                        let rr = r * (1.0 + self.wobble * (self.wobble_freq * t + wphase).sin());
                        let ang = phase + omega * t;
                        TrackPoint { lon: cx + rr * ang.cos(), lat: cy + rr * ang.sin(), time: t }
                    })
                    .collect();
                Track { id: format!("syn{k}"), kind: "car".into(), points }
            })
            .collect();
        TrackTable { tracks }
    }
}

/// Straight constant-velocity tracks; linear extrapolation predicts them exactly.
pub fn constant_velocity_tracks(n_tracks: usize, length: usize, seed: u64) -> TrackTable {
    let mut rng = rng_from_seed(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let tracks = (0..n_tracks)
        .map(|k| {
            let (x0, y0) = (5.0 * unit.sample(&mut rng), 5.0 * unit.sample(&mut rng));
            let (vx, vy) = (unit.sample(&mut rng), unit.sample(&mut rng));
            let points = (0..length)
                .map(|t| {
                    let t = t as f64;
                    TrackPoint { lon: x0 + vx * t, lat: y0 + vy * t, time: t }
                })
                .collect();
            Track { id: format!("cv{k}"), kind: "car".into(), points }
        })
        .collect();
    TrackTable { tracks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_for(rows: &[(&str, usize)]) -> String {
        let mut s = String::from("track_id,type,lon,lat,time\n");
        for &(id, n) in rows {
            for t in 0..n {
                s.push_str(&format!("{id},car,{},{},{}\n", t as f64 * 0.5, 1.0, t));
            }
        }
        s
    }

    #[test]
    fn one_track_loads_whole() {
        let out = load_tracks(csv_for(&[("a", 25)]).as_bytes()).unwrap();
        assert_eq!(out.table.len(), 1);
        assert_eq!(out.table.tracks[0].points.len(), 25);
        assert_eq!(out.dropped_short, 0);
    }

    #[test]
    fn short_tracks_are_dropped_and_counted() {
        let out = load_tracks(csv_for(&[("a", 25), ("b", 19)]).as_bytes()).unwrap();
        assert_eq!(out.table.len(), 1);
        assert_eq!(out.dropped_short, 1);
        let err = load_tracks(csv_for(&[("b", 19)]).as_bytes()).unwrap_err();
        assert!(matches!(err, SimError::EmptyData(_)));
    }

    #[test]
    fn shuffled_rows_come_back_sorted() {
        let mut lines: Vec<String> = (0..30).map(|t| format!("x,bus,{t},0,{t}")).collect();
        lines.reverse();
        lines.swap(3, 17);
        let text = format!("time,lat,lon,type,track_id,extra\n{}", {
            // reorder columns too
            lines
                .iter()
                .map(|l| {
                    let f: Vec<&str> = l.split(',').collect();
                    format!("{},{},{},{},{},z", f[4], f[3], f[2], f[1], f[0])
                })
                .collect::<Vec<_>>()
                .join("\n")
        });
        let out = load_tracks(text.as_bytes()).unwrap();
        let times: Vec<f64> = out.table.tracks[0].points.iter().map(|p| p.time).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(out.table.tracks[0].points[4].lon, 4.0);
        assert_eq!(out.table.tracks[0].kind, "bus");
    }

    #[test]
    fn duplicate_timestamps_keep_first() {
        let mut s = csv_for(&[("a", 20)]);
        s.push_str("a,car,99,99,3\n");
        let out = load_tracks(s.as_bytes()).unwrap();
        assert_eq!(out.dropped_duplicate_times, 1);
        assert_eq!(out.table.tracks[0].points[3].lon, 1.5);
    }

    #[test]
    fn schema_and_row_errors() {
        let err = load_tracks("track_id,type,lon,time\na,car,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SimError::MissingColumn(ref c) if c == "lat"), "{err}");
        let err = load_tracks("track_id,type,lon,lat,time\na,car,1,2,0\na,car,oops,2,1\n".as_bytes()).unwrap_err();
        match err {
            SimError::Row { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("lon"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_file_cites_record() {
        let err = load_tracks_path(Path::new("/nonexistent/D1_AM2_F1.csv")).unwrap_err();
        assert!(err.to_string().contains("zenodo.org/records/15077435"));
    }

    #[test]
    fn csv_round_trip() {
        let table = RoundaboutGenerator::default().generate(3);
        let mut buf = Vec::new();
        write_tracks_csv(&table, &mut buf).unwrap();
        let back = load_tracks(buf.as_slice()).unwrap().table;
        assert_eq!(back, table);
    }

    #[test]
    fn generator_is_deterministic_and_circular() {
        let g = RoundaboutGenerator { wobble: 0.0, ..Default::default() };
        let a = g.generate(11);
        assert_eq!(a, g.generate(11));
        assert_ne!(a, g.generate(12));
        for t in &a.tracks {
            // equal radius about the centroid of a full revolution's worth of points
            let n = t.points.len() as f64;
            let cx = t.points.iter().map(|p| p.lon).sum::<f64>() / n;
            let cy = t.points.iter().map(|p| p.lat).sum::<f64>() / n;
            let r: Vec<f64> = t.points.iter().map(|p| (p.lon - cx).hypot(p.lat - cy)).collect();
            let spread = r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1.0, "radius spread {spread}");
        }
    }
}
