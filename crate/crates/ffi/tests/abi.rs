use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use spinreg_ffi::*;

const NETWORK: &str = include_str!("../../../networks/nv-x-y.json");
const RABI: &str = include_str!("../../../experiments/fig3b.json");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn network() -> *mut SrNetwork {
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { sr_network_from_json(c(NETWORK).as_ptr(), &mut net) }, SrStatus::Ok);
    net
}

#[test]
fn run_and_fit_through_handles() {
    let net = network();
    assert_eq!(unsafe { sr_network_spin_count(net) }, 3);
    let mut tr = ptr::null_mut();
    let status = unsafe { sr_run_experiment(net, c(RABI).as_ptr(), 0, 0.0, &mut tr) };
    assert_eq!(status, SrStatus::Ok);
    let n = unsafe { sr_trace_len(tr) };
    assert!(n > 70);
    let x = unsafe { std::slice::from_raw_parts(sr_trace_abscissa(tr), n) };
    assert!(x.windows(2).all(|w| w[1] > w[0]));

    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { sr_fit(tr, c("cosine").as_ptr(), &mut json) }, SrStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert!((v["params"]["d0"].as_f64().unwrap() - 0.5e6).abs() < 1e3);
    unsafe {
        sr_string_free(json);
        sr_trace_free(tr);
        sr_network_free(net);
    }
}

#[test]
fn trace_from_caller_data() {
    let x: Vec<f64> = (0..60).map(|k| k as f64 * 2e-6).collect();
    let y: Vec<f64> = x.iter().map(|t| (-t / 30e-6f64).exp()).collect();
    let mut tr = ptr::null_mut();
    let st = unsafe { sr_trace_new(c("echo_time").as_ptr(), x.as_ptr(), y.as_ptr(), x.len(), &mut tr) };
    assert_eq!(st, SrStatus::Ok);
    assert_eq!(unsafe { *sr_trace_ordinate(tr).add(1) }, y[1]);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sr_fit(tr, c("exp-decay").as_ptr(), &mut json) }, SrStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert!((v["params"]["t"].as_f64().unwrap() / 30e-6 - 1.0).abs() < 1e-6);
    unsafe {
        sr_string_free(json);
        sr_trace_free(tr);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { sr_network_from_json(ptr::null(), &mut net) }, SrStatus::NullPointer);
    assert_eq!(unsafe { sr_network_from_json(c("{").as_ptr(), &mut net) }, SrStatus::Parse);
    assert!(net.is_null());
    let bad = NETWORK.replace("{ \"a\": \"NV\", \"b\": \"X\"", "{ \"a\": \"NV\", \"b\": \"Z\"");
    assert_eq!(unsafe { sr_network_from_json(c(&bad).as_ptr(), &mut net) }, SrStatus::Invalid);
    assert!(!last_error().is_empty());

    let net = network();
    let mut tr = ptr::null_mut();
    let spec = RABI.replace("\"Y\"", "\"Q\"");
    assert_eq!(unsafe { sr_run_experiment(net, c(&spec).as_ptr(), 0, 0.0, &mut tr) }, SrStatus::Invalid);
    assert!(last_error().contains('Q'), "{}", last_error());

    let x = [0.0, 1.0];
    assert_eq!(
        unsafe { sr_trace_new(c("furlongs").as_ptr(), x.as_ptr(), x.as_ptr(), 2, &mut tr) },
        SrStatus::Parse
    );
    unsafe { sr_network_free(net) };
    // Null handles are tolerated by the free and accessor functions.
    unsafe {
        sr_network_free(ptr::null_mut());
        sr_trace_free(ptr::null_mut());
        assert_eq!(sr_trace_len(ptr::null()), 0);
    }
}

#[test]
fn analytic_calls() {
    let b = SrChainBudget { t_gate: 10e-6, t1_rho: 100e-6, t1: f64::INFINITY, t2: 50e-6, eta: 1.0, threshold: 0.1 };
    let mut n = 0usize;
    assert_eq!(unsafe { sr_max_layer(&b, SrChainModel::Hhcp, &mut n) }, SrStatus::Ok);
    assert_eq!(n, 11);
    let b86 = SrChainBudget { eta: 0.86, ..b };
    assert_eq!(unsafe { sr_max_layer(&b86, SrChainModel::Hhcp, &mut n) }, SrStatus::Ok);
    assert_eq!(n, 4);
    let bad = SrChainBudget { eta: 2.0, ..b };
    assert_eq!(unsafe { sr_max_layer(&bad, SrChainModel::Hhcp, &mut n) }, SrStatus::Invalid);
    assert!((unsafe { sr_chain_coherence(&b, 1, SrChainModel::Hhcp) } - (-0.2f64).exp()).abs() < 1e-15);

    assert_eq!(sr_hyperfine_splitting(17.2e6, 29.4e6, 0.0), 29.4e6);
    assert!(sr_defects_distinct(33.5e6, 17.2e6, 29.4e6, 0.3e6));
    assert!((sr_sedor_ramsey_model(67e3, 1.0 / 134e3) + 1.0).abs() < 1e-15);
    assert!((sr_coherence_radius(50e-6) * 1e9 - 25.38).abs() < 0.01);
}

#[test]
fn header_lists_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/spinreg.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let mut seen = 0;
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn sr_")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        seen += 1;
    }
    assert!(seen >= 18, "{seen}");
    for t in ["typedef struct SrNetwork SrNetwork;", "typedef struct SrTrace SrTrace;", "SR_STATUS_OK = 0"] {
        assert!(header.contains(t), "{t}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"spinreg.h\"\nint main(void) { SrNetwork *n = 0; return sr_network_from_json(\"{}\", &n) == SR_STATUS_OK; }\n",
    )
    .unwrap();
    let inc = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&inc)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
