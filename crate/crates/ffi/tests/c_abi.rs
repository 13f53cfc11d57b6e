use std::ptr;

use schmidt_ffi::*;

fn phi(d: usize, r: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2 * d * d];
    for k in 0..r {
        v[2 * (k * d + k)] = 1.0 / (r as f64).sqrt();
    }
    v
}

fn projector(amps: &[f64]) -> Vec<f64> {
    let n = amps.len() / 2;
    let mut m = vec![0.0; 2 * n * n];
    for i in 0..n {
        for j in 0..n {
            let (ar, ai) = (amps[2 * i], amps[2 * i + 1]);
            let (br, bi) = (amps[2 * j], -amps[2 * j + 1]);
            m[2 * (i * n + j)] = ar * br - ai * bi;
            m[2 * (i * n + j) + 1] = ar * bi + ai * br;
        }
    }
    m
}

#[test]
fn f12_and_certify_phi3() {
    unsafe {
        let mut l = ptr::null_mut();
        assert_eq!(schmidt_observable_new(3, 3, projector(&phi(3, 3)).as_ptr(), &mut l), SchmidtStatus::Ok);
        let mut cfg = schmidt_solver_config_default();
        cfg.restarts = 16;
        let mut f = 0.0;
        assert_eq!(schmidt_f12(l, 1, &cfg, &mut f), SchmidtStatus::Ok);
        assert!((f - 1.0 / 3.0).abs() < 1e-6, "{f}");

        let mut rho = ptr::null_mut();
        assert_eq!(schmidt_density_from_pure(3, 3, phi(3, 3).as_ptr(), &mut rho), SchmidtStatus::Ok);
        let (mut margin, mut certified) = (0.0, -1);
        assert_eq!(schmidt_certify(rho, l, 2, &cfg, &mut margin, &mut certified), SchmidtStatus::Ok);
        assert_eq!(certified, 1);
        assert!((margin - 1.0 / 3.0).abs() < 1e-6);

        let (mut v, mut lo, mut hi) = (0, 0, 0);
        assert_eq!(schmidt_estimate(rho, ptr::null(), &mut v, &mut lo, &mut hi), SchmidtStatus::Ok);
        assert_eq!(v, 3);

        let (mut min_eig, mut npt) = (0.0, 0);
        assert_eq!(schmidt_is_npt(rho, &mut min_eig, &mut npt), SchmidtStatus::Ok);
        assert_eq!(npt, 1);
        assert!((min_eig + 1.0 / 3.0).abs() < 1e-9);

        schmidt_density_free(rho);
        schmidt_observable_free(l);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut rho = ptr::null_mut();
        let bad = vec![1.0; 2 * 4];
        assert_eq!(schmidt_density_from_pure(2, 2, bad.as_ptr(), &mut rho), SchmidtStatus::InvalidInput);
        assert!(rho.is_null());
        let mut buf = [0 as std::ffi::c_char; 256];
        let n = schmidt_last_error(buf.as_mut_ptr(), buf.len());
        assert!(n > 0);
        let msg = std::ffi::CStr::from_ptr(buf.as_ptr()).to_string_lossy();
        assert!(msg.contains("norm"), "{msg}");

        assert_eq!(schmidt_density_new(2, 2, ptr::null(), &mut rho), SchmidtStatus::NullPointer);
        let mut f = 0.0;
        assert_eq!(schmidt_f12(ptr::null(), 1, ptr::null(), &mut f), SchmidtStatus::NullPointer);
        schmidt_density_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::path::Path::new(dir).join("include/schmidt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["schmidt_f12", "schmidt_certify", "schmidt_estimate", "SCHMIDT_STATUS_INCOMPLETE_BASIS", "SchmidtDensity"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("t.c");
    std::fs::write(&src, "#include \"schmidt.h\"\nint main(void){SchmidtSolverConfig c; (void)c; return SCHMIDT_STATUS_OK;}\n").unwrap();
    let status = std::process::Command::new(cc)
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
