use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_mpcsynth");

const CONFIG: &str = "folds = 2\nmax_loops = 2\nhyperparameters = 5, 9\nseed = 21\nepochs = 3\n";

fn dataset(rows: usize, shift: usize) -> String {
    let mut s = String::from("g1,g2,g3,label\n");
    for i in 0..rows {
        let k = i + shift;
        s.push_str(&format!("{},{},{},{}\n", (k * 37 % 11) as f64 * 0.25, -((k * 13 % 7) as f64), (k % 5) as f64 + 0.5, k % 5));
    }
    s
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        let d = Dir(tempfile::tempdir().unwrap());
        d.write("config.txt", CONFIG);
        d.write("a.csv", &dataset(14, 0));
        d.write("b.csv", &dataset(16, 3));
        d.write("open.txt", "max_wle = inf\nmin_accuracy = 0\n");
        d.write("closed.txt", "max_wle = inf\nmin_accuracy = 2\n");
        d
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(BIN).current_dir(self.0.path()).args(args).output().unwrap()
    }

    fn spawn(&self, args: &[&str]) -> Child {
        Command::new(BIN)
            .current_dir(self.0.path())
            .args(args)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap()
    }
}

fn local(dir: &Dir, thresholds: &str, out: &str, report: &str) -> Output {
    dir.run(&[
        "run-local", "--config", "config.txt", "--data", "a.csv", "--data", "b.csv", "--thresholds", thresholds, "--out",
        out, "--report", report,
    ])
}

fn text(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn free_ports(n: usize) -> Vec<u16> {
    let ls: Vec<TcpListener> = (0..n).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
    ls.iter().map(|l| l.local_addr().unwrap().port()).collect()
}

#[test]
fn run_local_publishes_with_vacuous_thresholds() {
    let dir = Dir::new();
    let out = local(&dir, "open.txt", "synth.csv", "report.json");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let synth = text(&dir.path("synth.csv"));
    let lines: Vec<&str> = synth.lines().collect();
    assert_eq!(lines.len(), 31);
    assert_eq!(lines[0], "g1,g2,g3,label");
    assert!(lines.iter().all(|l| l.split(',').count() == 4));
    let report = text(&dir.path("report.json"));
    assert!(report.contains("\"decision\": \"publish\""));
    assert!(report.contains("π_LR"));
}

#[test]
fn run_local_no_publish_writes_no_dataset() {
    let dir = Dir::new();
    let out = local(&dir, "closed.txt", "synth.csv", "report.json");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path("synth.csv").exists());
    assert!(text(&dir.path("report.json")).contains("\"decision\": \"no-publish\""));
}

#[test]
fn malformed_label_names_the_row() {
    let dir = Dir::new();
    let mut bad = dataset(14, 0).lines().map(str::to_string).collect::<Vec<_>>();
    bad[12] = "1,2,3,7".into();
    dir.write("a.csv", &(bad.join("\n") + "\n"));
    let out = local(&dir, "open.txt", "synth.csv", "report.json");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 12"));
}

#[test]
fn custodian_input_and_connectivity_errors() {
    let dir = Dir::new();
    dir.write("partial.txt", "max_wle = 0.3\n");
    let port = free_ports(3);
    let servers = format!("127.0.0.1:{},127.0.0.1:{},127.0.0.1:{}", port[0], port[1], port[2]);
    let out = dir.run(&["custodian", "--data", "a.csv", "--thresholds", "partial.txt", "--servers", &servers]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("min_accuracy"));
    let out = dir.run(&["custodian", "--data", "a.csv", "--thresholds", "open.txt", "--servers", &servers, "--timeout", "1"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

fn spawn_servers(dir: &Dir, ports: &[u16], configs: [&str; 3]) -> Vec<Child> {
    (0..3)
        .map(|i| {
            let listen = format!("127.0.0.1:{}", ports[i]);
            let peers: Vec<String> =
                (0..3).filter(|&j| j != i).map(|j| format!("{}=127.0.0.1:{}", j + 1, ports[j])).collect();
            let id = (i + 1).to_string();
            let report = format!("party{}.json", i + 1);
            dir.spawn(&[
                "party", "--id", &id, "--listen", &listen, "--peer", &peers[0], "--peer", &peers[1], "--config",
                configs[i], "--seed", "21", "--report", &report, "--timeout", "30",
            ])
        })
        .collect()
}

#[test]
fn processes_over_tcp_reproduce_run_local() {
    let dir = Dir::new();
    assert_eq!(local(&dir, "open.txt", "local.csv", "local.json").status.code(), Some(0));
    let ports = free_ports(3);
    let servers = spawn_servers(&dir, &ports, ["config.txt"; 3]);
    let list = ports.iter().map(|p| format!("127.0.0.1:{p}")).collect::<Vec<_>>().join(",");
    let custodians: Vec<Child> = [("1", "a.csv", "out1.csv"), ("2", "b.csv", "out2.csv")]
        .iter()
        .map(|(id, data, out)| {
            dir.spawn(&[
                "custodian", "--id", id, "--data", data, "--thresholds", "open.txt", "--servers", &list, "--seed", "21",
                "--out", out,
            ])
        })
        .collect();
    for c in servers.into_iter().chain(custodians) {
        let o = c.wait_with_output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let want = text(&dir.path("local.csv"));
    assert_eq!(text(&dir.path("out1.csv")), want);
    assert_eq!(text(&dir.path("out2.csv")), want);
    for i in 1..=3 {
        assert!(text(&dir.path(&format!("party{i}.json"))).contains("\"decision\": \"publish\""));
    }
}

#[test]
fn wrong_peer_configuration_exits_with_connectivity_code() {
    let dir = Dir::new();
    dir.write("other.txt", &CONFIG.replace("folds = 2", "folds = 3"));
    let ports = free_ports(3);
    let servers = spawn_servers(&dir, &ports, ["config.txt", "config.txt", "other.txt"]);
    let list = ports.iter().map(|p| format!("127.0.0.1:{p}")).collect::<Vec<_>>().join(",");
    let custodians: Vec<Child> = [("1", "a.csv"), ("2", "b.csv")]
        .iter()
        .map(|(id, data)| {
            dir.spawn(&["custodian", "--id", id, "--data", data, "--thresholds", "open.txt", "--servers", &list])
        })
        .collect();
    for c in servers.into_iter().chain(custodians) {
        let o = c.wait_with_output().unwrap();
        assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    }
}
