#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vpp_core::imgio::{write_image, write_pfm};
use vpp_core::synth::Scene;

pub struct SceneFiles {
    pub left: PathBuf,
    pub right: PathBuf,
    pub gt: PathBuf,
}

pub fn write_scene(scene: &Scene, dir: &Path) -> SceneFiles {
    let files = SceneFiles {
        left: dir.join("im0.png"),
        right: dir.join("im1.png"),
        gt: dir.join("disp0.pfm"),
    };
    write_image(&scene.left, &files.left).unwrap();
    write_image(&scene.right, &files.right).unwrap();
    write_pfm(&scene.gt_left, &files.gt).unwrap();
    files
}

pub fn vpp<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_vpp"))
        .args(args)
        .output()
        .expect("spawn vpp")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
