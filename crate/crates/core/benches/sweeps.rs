use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use sgbcrypt::sim::{self, ScenarioConfig};
use sgbcrypt::sweep::{self, Exec};
use sgbcrypt::vector::{self, VectorFile};
use sgbcrypt::{AcceptancePolicy, AssetId, Counter, ReplayState, SecretKey, Timestamp};
use std::hint::black_box;

const FRAME: &str = "e8027e081a3d0eb894a953803d9362ab5d2df4687b43755b53792f9f6c6ee27169e8f89b52128cb327d94586306bec73c04157efb2640c63";
const T_S: u64 = 0x0eb8_94a9_5380_3d93;

fn execs() -> Vec<(&'static str, Exec)> {
    let mut out = vec![("sequential", Exec::Sequential)];
    if Exec::PARALLEL_AVAILABLE {
        out.push(("parallel", Exec::Parallel));
    }
    out
}

fn key() -> SecretKey {
    SecretKey::from_slice(
        &hex::decode("1c195d64578ad0af88addd2fa452f37ee1d390728cf0258e316f1b732d2f5756").unwrap(),
    )
    .unwrap()
}

fn bitflip(c: &mut Criterion) {
    let frame: [u8; 56] = hex::decode(FRAME).unwrap().try_into().unwrap();
    let key = key();
    let state = ReplayState::new();
    let policy = AcceptancePolicy::normal();
    let mut group = c.benchmark_group("bitflip_sweep");
    for (name, exec) in execs() {
        group.bench_function(name, |b| {
            b.iter(|| {
                sweep::bitflip_sweep(
                    &key,
                    black_box(&frame),
                    Timestamp(T_S),
                    &state,
                    &policy,
                    exec,
                )
            })
        });
    }
    group.finish();
}

fn crash(c: &mut Criterion) {
    let key = key();
    let mut group = c.benchmark_group("crash_sweep");
    for records in [4usize, 16] {
        for (name, exec) in execs() {
            group.bench_with_input(BenchmarkId::new(name, records), &records, |b, &records| {
                b.iter(|| sweep::crash_sweep(&key, AssetId(1), Timestamp(T_S), records, 3, exec))
            });
        }
    }
    group.finish();
}

fn scenarios(c: &mut Criterion) {
    let config = ScenarioConfig::default();
    let mut group = c.benchmark_group("scenario_suite");
    for (name, exec) in execs() {
        group.bench_function(name, |b| {
            b.iter(|| sim::run_all(black_box(&config), exec).unwrap())
        });
    }
    group.finish();
}

fn vectors(c: &mut Criterion) {
    let batch: Vec<VectorFile> = (0..512u32)
        .map(|i| {
            let mut key = [0u8; 32];
            key[..4].copy_from_slice(&i.to_be_bytes());
            VectorFile::generate(
                &key,
                AssetId(i as u16),
                Counter(i),
                Timestamp(i as u64),
                &[i as u8; 26],
            )
        })
        .collect();
    let mut group = c.benchmark_group("verify_vectors_512");
    for (name, exec) in execs() {
        group.bench_function(name, |b| {
            b.iter(|| vector::verify_all(black_box(&batch), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bitflip, crash, scenarios, vectors);
criterion_main!(benches);
