#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Deserialize;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn fatigue_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fatigue.csv")
}

pub fn fatigue_data() -> Vec<f64> {
    let text = std::fs::read_to_string(fatigue_path()).unwrap();
    text.lines().skip(1).map(|l| l.trim().parse().unwrap()).collect()
}

pub fn load<T: DeserializeOwned>(name: &str) -> Vec<T> {
    let mut r = csv::Reader::from_path(data_path(name)).unwrap();
    r.deserialize().map(|row| row.unwrap()).collect()
}

#[derive(Debug, Deserialize)]
pub struct MeanRow {
    pub n: usize,
    pub r: usize,
    pub psi: f64,
    pub value: String,
}

#[derive(Debug, Deserialize)]
pub struct CoefRow {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub i: usize,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
pub struct EfficiencyRow {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub rec_location: f64,
    pub rec_scale: f64,
}

#[derive(Debug, Deserialize)]
pub struct PredictionRow {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub v4: f64,
    pub rec: f64,
}

#[derive(Debug, Deserialize)]
pub struct QuantileRow {
    pub kind: String,
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub q: Option<usize>,
    pub tau: f64,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
pub struct StudyEstimateRow {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub blue_location: f64,
    pub blie_location: f64,
    pub blue_scale: f64,
    pub blie_scale: f64,
    pub blup: f64,
    pub blip: f64,
    pub bias_blup: f64,
    pub bias_blip: f64,
    pub emspe_blup: f64,
    pub emspe_blip: f64,
}

#[derive(Debug, Deserialize)]
pub struct StudyIntervalRow {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    #[serde(rename = "aw_T1")]
    pub aw_t1: f64,
    #[serde(rename = "aw_T2")]
    pub aw_t2: f64,
    #[serde(rename = "aw_T3")]
    pub aw_t3: f64,
    #[serde(rename = "aw_T4")]
    pub aw_t4: f64,
    #[serde(rename = "aw_T1*")]
    pub aw_t1s: f64,
    #[serde(rename = "aw_T2*")]
    pub aw_t2s: f64,
    #[serde(rename = "cp_T1")]
    pub cp_t1: f64,
    #[serde(rename = "cp_T2")]
    pub cp_t2: f64,
    #[serde(rename = "cp_T3")]
    pub cp_t3: f64,
    #[serde(rename = "cp_T4")]
    pub cp_t4: f64,
    #[serde(rename = "cp_T1*")]
    pub cp_t1s: f64,
    #[serde(rename = "cp_T2*")]
    pub cp_t2s: f64,
}

impl StudyIntervalRow {
    pub fn widths(&self) -> [f64; 6] {
        [self.aw_t1, self.aw_t2, self.aw_t3, self.aw_t4, self.aw_t1s, self.aw_t2s]
    }

    pub fn coverages(&self) -> [f64; 6] {
        [self.cp_t1, self.cp_t2, self.cp_t3, self.cp_t4, self.cp_t1s, self.cp_t2s]
    }
}

/// One verdict line per criterion, written past the test harness capture.
pub fn verdict(label: &str, ok: bool, detail: &str) {
    let line = format!("{} {label}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
}
