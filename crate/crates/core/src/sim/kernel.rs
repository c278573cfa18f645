use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashSet, VecDeque};

use super::{Circuit, LogicLevel, NetId, SimError, SimTime, Value};
use crate::sim::ComponentId;

/// A scheduled net transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub net: NetId,
    pub value: Value,
    pub seq: u64,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An applied event together with the value it replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub time: SimTime,
    pub seq: u64,
    pub net: NetId,
    pub from: Value,
    pub to: Value,
}

impl Transition {
    pub fn rising(&self) -> bool {
        self.from.level() != LogicLevel::High && self.to.level() == LogicLevel::High
    }

    pub fn falling(&self) -> bool {
        self.from.level() == LogicLevel::High && self.to.level() != LogicLevel::High
    }
}

/// Read-only view of all net values handed to probes.
pub struct NetValues<'a>(&'a [Value]);

impl NetValues<'_> {
    pub fn get(&self, net: NetId) -> Value {
        self.0[net.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProbeId(pub usize);

type Observer = Box<dyn FnMut(&Transition, &NetValues<'_>) + Send>;

struct Probe {
    net: NetId,
    observer: Observer,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub events_processed: u64,
    pub final_time: SimTime,
    pub transitions_per_net: BTreeMap<NetId, u64>,
}

/// Event-driven simulator owning one circuit instance.
pub struct Kernel {
    circuit: Circuit,
    values: Vec<Value>,
    fanout: Vec<Vec<ComponentId>>,
    queue: BinaryHeap<Reverse<Event>>,
    /// Per-net pending events in `(time, seq)` order; the last one is the
    /// value the net is projected to settle at.
    pending: Vec<VecDeque<Event>>,
    cancelled: HashSet<u64>,
    now: SimTime,
    next_seq: u64,
    transitions: Vec<u64>,
    probes: Vec<Option<Probe>>,
    net_probes: Vec<Vec<usize>>,
    recorded: Option<Vec<Event>>,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("now", &self.now)
            .field("pending_events", &self.queue.len())
            .finish_non_exhaustive()
    }
}

impl Kernel {
    /// Creates a kernel and performs the power-on evaluation of every
    /// component at time zero, so inconsistent initial states (oscillators,
    /// rings) start moving.
    pub fn new(circuit: Circuit) -> Result<Self, SimError> {
        let values: Vec<Value> = circuit.nets().iter().map(|n| n.initial).collect();
        let n = values.len();
        let mut fanout = vec![Vec::new(); n];
        for (i, c) in circuit.components().iter().enumerate() {
            let mut ins = c.inputs();
            ins.dedup();
            for net in ins {
                if net.0 >= n {
                    return Err(SimError::UnknownNet(net));
                }
                fanout[net.0].push(ComponentId(i));
            }
        }
        let mut k = Kernel {
            circuit,
            values,
            fanout,
            queue: BinaryHeap::new(),
            pending: vec![VecDeque::new(); n],
            cancelled: HashSet::new(),
            now: SimTime::ZERO,
            next_seq: 0,
            transitions: vec![0; n],
            probes: Vec::new(),
            net_probes: vec![Vec::new(); n],
            recorded: None,
        };
        for i in 0..k.circuit.components().len() {
            k.evaluate(ComponentId(i))?;
        }
        Ok(k)
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn circuit_mut(&mut self) -> &mut Circuit {
        &mut self.circuit
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn value(&self, net: NetId) -> Value {
        self.values[net.0]
    }

    /// Value the net will hold once its pending events have been applied.
    pub fn projected(&self, net: NetId) -> Value {
        self.pending[net.0]
            .back()
            .map(|e| e.value)
            .unwrap_or(self.values[net.0])
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.len() == self.cancelled.len()
    }

    pub fn next_event_time(&mut self) -> Option<SimTime> {
        self.drop_cancelled_head();
        self.queue.peek().map(|Reverse(e)| e.time)
    }

    pub fn transition_count(&self, net: NetId) -> u64 {
        self.transitions[net.0]
    }

    /// Starts keeping every applied event for later inspection.
    pub fn record_events(&mut self) {
        self.recorded.get_or_insert_with(Vec::new);
    }

    pub fn recorded_events(&self) -> &[Event] {
        self.recorded.as_deref().unwrap_or(&[])
    }

    /// Schedules `value` on `net` at `time`.
    ///
    /// Returns the event sequence number, or `None` when the event would not
    /// change the net's projected value and was dropped. A new event at the
    /// same time as the net's latest pending event supersedes it.
    pub fn schedule(
        &mut self,
        net: NetId,
        value: Value,
        time: SimTime,
    ) -> Result<Option<u64>, SimError> {
        let info = self.circuit.net(net).ok_or(SimError::UnknownNet(net))?;
        if info.is_word() != value.is_word() {
            return Err(SimError::ValueKind { net, value });
        }
        if time < self.now {
            return Err(SimError::SchedulingInPast { at: time, now: self.now });
        }
        Ok(self.enqueue(net, value, time))
    }

    fn enqueue(&mut self, net: NetId, value: Value, time: SimTime) -> Option<u64> {
        let pend = &mut self.pending[net.0];
        // Events scheduled later than `time` are left alone; only the tail
        // of the per-net queue participates in redundancy checks.
        let mut pos = pend.partition_point(|e| e.time <= time);
        if pos == pend.len() {
            if let Some(old) = pend.pop_back_if(|last| last.time == time) {
                self.cancelled.insert(old.seq);
                pos -= 1;
            }
            let before = pend.back().map(|e| e.value).unwrap_or(self.values[net.0]);
            if before == value {
                return None;
            }
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let ev = Event {
            time,
            net,
            value,
            seq,
        };
        pend.insert(pos, ev);
        self.queue.push(Reverse(ev));
        Some(seq)
    }

    fn drop_cancelled_head(&mut self) {
        while let Some(Reverse(e)) = self.queue.peek() {
            if self.cancelled.remove(&e.seq) {
                self.queue.pop();
            } else {
                break;
            }
        }
    }

    /// Applies the next event, evaluates its fanout and returns it.
    pub fn step(&mut self) -> Result<Option<Event>, SimError> {
        self.drop_cancelled_head();
        let Some(Reverse(ev)) = self.queue.pop() else {
            return Ok(None);
        };
        let pend = &mut self.pending[ev.net.0];
        if let Some(i) = pend.iter().position(|e| e.seq == ev.seq) {
            pend.remove(i);
        }
        self.now = ev.time;
        let from = self.values[ev.net.0];
        self.values[ev.net.0] = ev.value;
        self.transitions[ev.net.0] += 1;
        if let Some(rec) = &mut self.recorded {
            rec.push(ev);
        }
        let tr = Transition {
            time: ev.time,
            seq: ev.seq,
            net: ev.net,
            from,
            to: ev.value,
        };
        for &p in &self.net_probes[ev.net.0] {
            if let Some(probe) = &mut self.probes[p] {
                (probe.observer)(&tr, &NetValues(&self.values));
            }
        }
        for i in 0..self.fanout[ev.net.0].len() {
            let c = self.fanout[ev.net.0][i];
            self.evaluate(c)?;
        }
        Ok(Some(ev))
    }

    fn evaluate(&mut self, id: ComponentId) -> Result<(), SimError> {
        let comp = &mut self.circuit.components_mut()[id.0];
        let out = comp.output();
        let at = self.now + comp.delay;
        if let Some(v) = comp.evaluate(&self.values)? {
            self.enqueue(out, v, at);
        }
        Ok(())
    }

    /// Processes every event with time `<= until`.
    pub fn run_until(&mut self, until: SimTime) -> Result<RunStats, SimError> {
        let mut stats = RunStats::default();
        while let Some(t) = self.next_event_time() {
            if t > until {
                break;
            }
            let ev = self.step()?.expect("head exists");
            stats.events_processed += 1;
            *stats.transitions_per_net.entry(ev.net).or_default() += 1;
        }
        if !self.is_quiescent() && until > self.now {
            self.now = until;
        }
        stats.final_time = self.now;
        Ok(stats)
    }

    /// Runs until the queue drains, failing after `budget` events.
    pub fn run_to_quiescence(&mut self, budget: u64) -> Result<RunStats, SimError> {
        let mut stats = RunStats::default();
        while self.next_event_time().is_some() {
            if stats.events_processed >= budget {
                return Err(SimError::EventBudget(budget));
            }
            let ev = self.step()?.expect("head exists");
            stats.events_processed += 1;
            *stats.transitions_per_net.entry(ev.net).or_default() += 1;
        }
        stats.final_time = self.now;
        Ok(stats)
    }

    /// Registers `observer` to be called after every transition of `net`.
    pub fn attach_probe<F>(&mut self, net: NetId, observer: F) -> Result<ProbeId, SimError>
    where
        F: FnMut(&Transition, &NetValues<'_>) + Send + 'static,
    {
        if net.0 >= self.values.len() {
            return Err(SimError::UnknownNet(net));
        }
        self.probes.push(Some(Probe {
            net,
            observer: Box::new(observer),
        }));
        let id = self.probes.len() - 1;
        self.net_probes[net.0].push(id);
        Ok(ProbeId(id))
    }

    pub fn detach_probe(&mut self, id: ProbeId) -> Result<(), SimError> {
        let probe = self
            .probes
            .get_mut(id.0)
            .and_then(Option::take)
            .ok_or(SimError::UnknownProbe(id.0))?;
        self.net_probes[probe.net.0].retain(|&p| p != id.0);
        Ok(())
    }
}
