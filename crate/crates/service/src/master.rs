//! Server registry, task placement and failover.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::storage::TaskDb;

pub const HEARTBEAT_INTERVAL_S: f64 = 2.0;
pub const HEARTBEAT_TIMEOUT_S: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerEntry {
    pub id: String,
    pub address: String,
    pub last_heartbeat: f64,
    /// Active tasks currently assigned.
    pub load: usize,
    pub alive: bool,
}

/// Everything the master needs to resume after a restart.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MasterSnapshot {
    /// Bumped on every mutation.
    pub seq: u64,
    pub servers: BTreeMap<String, ServerEntry>,
    /// Active task to server.
    pub assignments: BTreeMap<String, String>,
    /// Active tasks waiting for a live server.
    pub parked: BTreeSet<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FailoverReport {
    pub dead: Vec<String>,
    /// `(task, from, to)`.
    pub moved: Vec<(String, String, String)>,
    pub parked: Vec<String>,
    /// Previously parked tasks that found a server.
    pub unparked: Vec<(String, String)>,
}

impl FailoverReport {
    pub fn is_empty(&self) -> bool {
        self.dead.is_empty() && self.moved.is_empty() && self.parked.is_empty() && self.unparked.is_empty()
    }
}

#[derive(Debug)]
pub struct Master {
    snap: MasterSnapshot,
    db: Option<TaskDb>,
    timeout: f64,
}

impl Master {
    /// A master that persists its snapshot into `db` after each mutation.
    pub fn new(db: Option<TaskDb>) -> Self {
        Self {
            snap: MasterSnapshot::default(),
            db,
            timeout: HEARTBEAT_TIMEOUT_S,
        }
    }

    pub fn with_timeout(mut self, timeout: f64) -> Self {
        self.timeout = timeout;
        self
    }

    /// Restores state from the persisted snapshot, or starts empty.
    pub fn recover(db: TaskDb) -> Result<Self, ServiceError> {
        let snap = db.read_snapshot::<MasterSnapshot>()?.unwrap_or_default();
        Ok(Self {
            snap,
            db: Some(db),
            timeout: HEARTBEAT_TIMEOUT_S,
        })
    }

    pub fn snapshot(&self) -> &MasterSnapshot {
        &self.snap
    }

    fn commit(&mut self) -> Result<(), ServiceError> {
        let mut load: BTreeMap<&str, usize> = BTreeMap::new();
        for s in self.snap.assignments.values() {
            *load.entry(s).or_default() += 1;
        }
        for (id, e) in self.snap.servers.iter_mut() {
            e.load = load.get(id.as_str()).copied().unwrap_or(0);
        }
        self.snap.seq += 1;
        match &self.db {
            Some(db) => db.write_snapshot(&self.snap),
            None => Ok(()),
        }
    }

    pub fn register_server(&mut self, id: &str, address: &str, now: f64) -> Result<(), ServiceError> {
        self.snap.servers.insert(
            id.to_owned(),
            ServerEntry {
                id: id.to_owned(),
                address: address.to_owned(),
                last_heartbeat: now,
                load: 0,
                alive: true,
            },
        );
        self.commit()
    }

    /// Records a heartbeat, reviving the server if it had been marked dead.
    pub fn heartbeat(&mut self, id: &str, now: f64) -> Result<(), ServiceError> {
        let e = self
            .snap
            .servers
            .get_mut(id)
            .ok_or_else(|| ServiceError::BadRequest(format!("unknown server '{id}'")))?;
        e.last_heartbeat = now;
        if !e.alive {
            e.alive = true;
            return self.commit();
        }
        // Heartbeats alone are not worth a snapshot write.
        Ok(())
    }

    fn least_loaded(&self) -> Option<String> {
        let mut load: BTreeMap<&str, usize> = self
            .snap
            .servers
            .values()
            .filter(|e| e.alive)
            .map(|e| (e.id.as_str(), 0))
            .collect();
        for s in self.snap.assignments.values() {
            if let Some(l) = load.get_mut(s.as_str()) {
                *l += 1;
            }
        }
        // BTreeMap iteration makes ties resolve to the smallest id.
        load.into_iter().min_by_key(|&(_, l)| l).map(|(id, _)| id.to_owned())
    }

    pub fn has_live_server(&self) -> bool {
        self.snap.servers.values().any(|e| e.alive)
    }

    /// Places a task on the least-loaded live server; parks it if none.
    pub fn assign(&mut self, task_id: &str) -> Result<String, ServiceError> {
        if let Some(s) = self.snap.assignments.get(task_id) {
            return Ok(s.clone());
        }
        match self.least_loaded() {
            Some(s) => {
                self.snap.parked.remove(task_id);
                self.snap.assignments.insert(task_id.to_owned(), s.clone());
                self.commit()?;
                Ok(s)
            }
            None => {
                self.snap.parked.insert(task_id.to_owned());
                self.commit()?;
                Err(ServiceError::Unavailable("no live suggestion server".into()))
            }
        }
    }

    /// Drops a finished task from the assignment map.
    pub fn release(&mut self, task_id: &str) -> Result<(), ServiceError> {
        let a = self.snap.assignments.remove(task_id).is_some();
        let b = self.snap.parked.remove(task_id);
        if a || b {
            self.commit()?;
        }
        Ok(())
    }

    /// The live server responsible for `task_id`.
    pub fn route(&self, task_id: &str) -> Result<&ServerEntry, ServiceError> {
        let id = self
            .snap
            .assignments
            .get(task_id)
            .ok_or_else(|| ServiceError::Unavailable(format!("task '{task_id}' has no server")))?;
        self.snap
            .servers
            .get(id)
            .filter(|e| e.alive)
            .ok_or_else(|| ServiceError::Unavailable(format!("server '{id}' is down")))
    }

    /// Marks servers with stale heartbeats dead, moves their tasks to the
    /// least-loaded live servers and places parked tasks.
    pub fn check_liveness(&mut self, now: f64) -> Result<FailoverReport, ServiceError> {
        let mut report = FailoverReport::default();
        for e in self.snap.servers.values_mut() {
            if e.alive && now - e.last_heartbeat > self.timeout {
                e.alive = false;
                report.dead.push(e.id.clone());
            }
        }
        let dead: BTreeSet<String> = self
            .snap
            .servers
            .values()
            .filter(|e| !e.alive)
            .map(|e| e.id.clone())
            .collect();
        let orphans: Vec<(String, String)> = self
            .snap
            .assignments
            .iter()
            .filter(|(_, s)| dead.contains(*s))
            .map(|(t, s)| (t.clone(), s.clone()))
            .collect();
        for (task, from) in orphans {
            self.snap.assignments.remove(&task);
            match self.least_loaded() {
                Some(to) => {
                    self.snap.assignments.insert(task.clone(), to.clone());
                    report.moved.push((task, from, to));
                }
                None => {
                    self.snap.parked.insert(task.clone());
                    report.parked.push(task);
                }
            }
        }
        let parked: Vec<String> = self.snap.parked.iter().cloned().collect();
        for task in parked {
            if report.parked.contains(&task) {
                continue;
            }
            if let Some(to) = self.least_loaded() {
                self.snap.parked.remove(&task);
                self.snap.assignments.insert(task.clone(), to.clone());
                report.unparked.push((task, to));
            }
        }
        if !report.is_empty() {
            for t in &report.moved {
                tracing::info!(task = %t.0, from = %t.1, to = %t.2, "task failed over");
            }
            self.commit()?;
        }
        Ok(report)
    }
}
