use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use crnf::contact_fields::contact_from_generating;
use crnf::contact_flow::{transport, values_at, ContactDiffeo};
use crnf::par::Exec;
use crnf::{random, OperatorSuite};

const MODES: [(Exec, &str); 2] = [(Exec::Sequential, "sequential"), (Exec::Parallel, "parallel")];

fn flow_transport(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_transport");
    group.sample_size(10);
    for n in [6, 8] {
        let ops = OperatorSuite::shared(n);
        let sp = &ops.space;
        let mut rng = random::rng(7);
        let g = random::real_scalar(sp, 4, &mut rng);
        let x = contact_from_generating(&ops, &g).unwrap();
        let x = x.scale(1e-2 / x.norm(&ops, 6));
        let id = ContactDiffeo::identity(sp);
        for (exec, name) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| transport(sp, &x, 32, exec, &id.points, &id.dev))
            });
        }
    }
    group.finish();
}

fn node_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("node_evaluation");
    for n in [6, 8] {
        let ops = OperatorSuite::shared(n);
        let sp = &ops.space;
        let mut rng = random::rng(11);
        let f = random::scalar(sp, n, &mut rng);
        let points = sp.grid.grid.nodes();
        for (exec, name) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| values_at(sp, &f, &points, exec)));
        }
    }
    group.finish();
}

criterion_group!(benches, flow_transport, node_evaluation);
criterion_main!(benches);
