use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tavis_core::hilbert::{DickeSpace, FockSpace};
use tavis_core::model::{generator_diagonal, SystemParams};
use tavis_core::qfi::{qfi_dsts_closed_form, qfi_spectral};
use tavis_core::states::{dsts_eigen_auto, fock_cutoff_of, spin_state, GaussianSpec, SpinStateSpec, DEFAULT_SUPPORT_TOL};

fn thermal() -> GaussianSpec {
    GaussianSpec::new(2.0, 0.3, 1.0, 0.7, 0.5).unwrap()
}

fn eigen(c: &mut Criterion) {
    let g = thermal();
    c.bench_function("dsts_eigen_auto thermal", |b| b.iter(|| dsts_eigen_auto(black_box(&g), DEFAULT_SUPPORT_TOL).unwrap()));
}

fn qfi(c: &mut Criterion) {
    let p = SystemParams::fig2(1e-6);
    let g = thermal();
    let spin = SpinStateSpec::Oat { chi: 1.0 };
    let optical = dsts_eigen_auto(&g, DEFAULT_SUPPORT_TOL).unwrap();
    let fock = FockSpace::new(fock_cutoff_of(&optical).unwrap()).unwrap();
    let dicke = DickeSpace::new(6).unwrap();
    let joint = optical.tensor_pure(&spin_state(&spin, dicke).unwrap(), dicke.into()).unwrap();
    let gen = generator_diagonal(&p, fock, dicke).unwrap();
    c.bench_function("qfi_spectral N=6", |b| b.iter(|| qfi_spectral(black_box(&joint), &gen, DEFAULT_SUPPORT_TOL).unwrap()));
    c.bench_function("qfi_dsts_closed_form N=6", |b| b.iter(|| qfi_dsts_closed_form(black_box(&g), &spin, 6, &p).unwrap()));
}

criterion_group!(benches, eigen, qfi);
criterion_main!(benches);
