//! The intra-day tick loop.
//!
//! Tick order: spawn arrivals, step guests (in arrival order), operate rides (in
//! placement order), account shop uptime, then step staff (in hiring order).

use std::collections::VecDeque;
use std::sync::Arc;

use super::guest::{ride_fun, softmax, utility, CandidateFeatures, Guest, GuestState};
use super::rng::RngStream;
use super::stats::{GuestRecord, EXITED, PARK_CLOSED, STAYED};
use crate::catalog::{Catalog, Kind, Role, SimParams, Subtype};
use crate::world::geometry::UNREACHABLE;
use crate::world::placement::effective_excitement;
use crate::world::{Geometry, ParkState, Pos};

pub const REASON_ATTRACTIONS: &str = "Too few unique attractions";
pub const REASON_DRINK: &str = "Too few unique drink shops";
pub const REASON_FOOD: &str = "Too few unique food shops";
pub const REASON_RIDES: &str = "too few rides";
pub const REASON_MONEY: &str = "out of money";
pub const REASON_TIRED: &str = "tired";
pub const REASON_UNHAPPY: &str = "unhappy";

/// Every exit reason a guest can record.
pub const EXIT_REASONS: [&str; 7] =
    [REASON_ATTRACTIONS, REASON_DRINK, REASON_FOOD, REASON_RIDES, REASON_MONEY, REASON_TIRED, REASON_UNHAPPY];

/// What a per-tick observer sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickProbe {
    pub tick: u32,
    pub spawned: u32,
    pub in_park: u32,
    pub exited: u32,
    /// Every cleanliness, uptime-so-far and guest happiness lies in [0, 1].
    pub fractions_in_bounds: bool,
}

/// Whether one ride operation ends in a breakdown.
pub fn breakdown_draw(rng: &mut RngStream, rate: f64) -> bool {
    rng.bernoulli(rate)
}

/// Per-attraction runtime data for one day.
struct Slot {
    kind: Kind,
    subtype: Subtype,
    role: Option<Role>,
    pos: Pos,
    /// Access tiles connected to the entrance.
    access: Vec<u16>,
    /// Every walkable access tile, for staff on other components.
    all_access: Vec<u16>,
    /// Distance from each walkable tile to the nearest entrance-connected access tile.
    field: Vec<u16>,
    reachable: bool,
    queue: VecDeque<usize>,
    riders: Vec<usize>,
    busy: u32,
    effective_excitement: f64,
    max_price: i64,
    capacity: u32,
    intensity: f64,
    breakdown_rate: f64,
    duration: u32,
    satisfaction: f64,
    repair_points: f64,
    /// Entertainment rate applied to this queue during the next guest phase.
    entertain: f64,
}

pub(crate) struct DaySim<'a> {
    catalog: &'a Catalog,
    p: &'a SimParams,
    geo: Arc<Geometry>,
    pub(crate) state: &'a mut ParkState,
    rng: RngStream,
    slots: Vec<Slot>,
    guests: Vec<Guest>,
    arrival_ticks: Vec<u32>,
    active: Vec<usize>,
    gone: Vec<bool>,
    pub(crate) records: Vec<GuestRecord>,
    exit_field: Vec<u16>,
    adjacent_specialty: Vec<Vec<usize>>,
    near_info_booth: Vec<bool>,
    pub(crate) breakdowns: u32,
    ticks: u32,
    /// Each janitor's current work tile and attraction, kept until clean.
    janitor_jobs: Vec<Option<(u16, Option<usize>)>>,
}

impl<'a> DaySim<'a> {
    pub(crate) fn new(state: &'a mut ParkState, catalog: &'a Catalog) -> DaySim<'a> {
        let p = &catalog.params;
        let geo = state.geometry();
        let rng = std::mem::replace(&mut state.rng, RngStream::new(0));
        let mut slots = Vec::with_capacity(state.entities.len());
        for (i, e) in state.entities.iter().enumerate() {
            let spec = catalog.lookup(e.key).expect("placed entities come from the catalog");
            let all_access = geo.access_tiles(e.pos);
            let access: Vec<u16> = all_access.iter().copied().filter(|&w| geo.connected_to_entrance(w)).collect();
            let field = geo.field_to(&access);
            let exc = if e.is_ride() {
                effective_excitement(state, catalog, state.entities[i].id).unwrap_or(0.0)
            } else {
                0.0
            };
            slots.push(Slot {
                kind: e.key.kind,
                subtype: e.key.subtype,
                role: spec.role,
                pos: e.pos,
                reachable: !access.is_empty(),
                access,
                all_access,
                field,
                queue: VecDeque::new(),
                riders: Vec::new(),
                busy: 0,
                effective_excitement: exc,
                max_price: spec.max_price,
                capacity: spec.capacity.max(1),
                intensity: spec.intensity,
                breakdown_rate: spec.breakdown_rate,
                duration: spec.ride_duration.max(1),
                satisfaction: spec.satisfaction,
                repair_points: spec.repair_points(),
                entertain: 0.0,
            });
        }
        let exit_field = geo.field_to(&[geo.exit]);
        let state_staff = state.staff.len();
        let mut adjacent_specialty = vec![Vec::new(); geo.len()];
        let mut near_info_booth = vec![false; geo.len()];
        for (i, s) in slots.iter().enumerate() {
            if s.subtype != Subtype::Specialty || !s.reachable {
                continue;
            }
            for &w in &s.access {
                adjacent_specialty[w as usize].push(i);
            }
            if s.role == Some(Role::InfoBooth) {
                for (w, near) in near_info_booth.iter_mut().enumerate() {
                    if geo.pos(w as u16).manhattan(s.pos) <= p.info_booth_radius {
                        *near = true;
                    }
                }
            }
        }
        DaySim {
            catalog,
            p,
            geo,
            state,
            rng,
            slots,
            guests: Vec::new(),
            arrival_ticks: Vec::new(),
            active: Vec::new(),
            gone: Vec::new(),
            records: Vec::new(),
            exit_field,
            adjacent_specialty,
            near_info_booth,
            breakdowns: 0,
            ticks: p.ticks_per_day,
            janitor_jobs: vec![None; state_staff],
        }
    }

    /// Total ride capacity used by the arrival formula.
    pub(crate) fn total_capacity(state: &ParkState, catalog: &Catalog) -> u32 {
        state.rides().map(|r| catalog.spec(r.key.subtype, r.key.subclass).capacity).sum()
    }

    /// Draws the day's arrivals, their arrival ticks and their initial latents.
    fn draw_arrivals(&mut self) {
        let p = self.p;
        let capacity = Self::total_capacity(self.state, self.catalog) as f64;
        let lambda = p.base_trickle + p.arrival_alpha * capacity * (self.state.park_rating / 100.0);
        let n = (self.rng.poisson(lambda) as u32).min(p.max_guests_per_day) as usize;
        let window = ((p.arrival_window * self.ticks as f64).floor() as u32).max(1);
        let mut ticks: Vec<u32> = (0..n).map(|_| self.rng.below(window as usize) as u32).collect();
        ticks.sort_unstable();
        let entrance = self.state.layout.entrance;
        let walk = self.geo.entrance;
        self.guests = (0..n).map(|_| Guest::sample(p, &mut self.rng, entrance, walk)).collect();
        self.arrival_ticks = ticks;
        self.gone = vec![false; n];
    }

    pub(crate) fn run(&mut self, mut probe: Option<&mut dyn FnMut(&TickProbe)>) {
        self.draw_arrivals();
        let mut next = 0usize;
        for tick in 0..self.ticks {
            while next < self.guests.len() && self.arrival_ticks[next] == tick {
                self.active.push(next);
                next += 1;
            }
            let order = self.active.clone();
            for gi in order {
                self.guest_step(gi);
            }
            let gone = &self.gone;
            self.active.retain(|&g| !gone[g]);
            for si in 0..self.slots.len() {
                if self.slots[si].kind == Kind::Ride {
                    self.ride_step(si);
                } else if !self.state.entities[si].day.out_of_service {
                    self.state.entities[si].day.in_service_ticks += 1;
                }
            }
            for s in self.slots.iter_mut() {
                s.entertain = 0.0;
            }
            for st in 0..self.state.staff.len() {
                self.staff_step(st);
            }
            if let Some(f) = probe.as_deref_mut() {
                let snapshot = TickProbe {
                    tick,
                    spawned: next as u32,
                    in_park: self.active.len() as u32,
                    exited: self.records.len() as u32,
                    fractions_in_bounds: self.fractions_in_bounds(tick + 1),
                };
                f(&snapshot);
            }
        }
        self.close();
    }

    fn fractions_in_bounds(&self, elapsed: u32) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        self.state.path_cleanliness.iter().all(|&c| unit(c))
            && self
                .state
                .entities
                .iter()
                .all(|e| unit(e.cleanliness) && unit(e.day.in_service_ticks as f64 / elapsed as f64))
            && self.active.iter().all(|&g| unit(self.guests[g].happiness))
    }

    /// Guests still inside at closing time stay; the rng is handed back to the state.
    fn close(&mut self) {
        for &gi in &self.active {
            let g = &self.guests[gi];
            self.records.push(record(g, STAYED, PARK_CLOSED));
        }
        self.active.clear();
        let ticks = self.ticks as f64;
        for e in self.state.entities.iter_mut() {
            e.day.uptime = e.day.in_service_ticks as f64 / ticks;
        }
        self.state.rng = std::mem::replace(&mut self.rng, RngStream::new(0));
    }

    // ------------------------------------------------------------------ guests

    fn guest_step(&mut self, gi: usize) {
        let p = self.p;
        {
            let g = &mut self.guests[gi];
            g.time_in_park += 1;
            g.hunger += p.hunger_rate;
            g.thirst += p.thirst_rate;
            g.energy -= p.energy_rate;
            if g.hunger > p.need_threshold {
                g.happiness -= p.unmet_need_happiness;
            }
            if g.thirst > p.need_threshold {
                g.happiness -= p.unmet_need_happiness;
            }
            g.clamp();
        }
        match self.guests[gi].state {
            GuestState::Riding => {}
            GuestState::Queueing => self.queue_tick(gi),
            GuestState::Leaving => {
                let field = std::mem::take(&mut self.exit_field);
                let arrived = self.walk_step(gi, &field);
                self.exit_field = field;
                if arrived {
                    self.finish(gi);
                }
            }
            GuestState::Walking | GuestState::Shopping => self.walking_tick(gi),
        }
    }

    fn queue_tick(&mut self, gi: usize) {
        let p = self.p;
        let Some(s) = self.guests[gi].current_target else {
            self.guests[gi].state = GuestState::Walking;
            return;
        };
        let entertain = self.slots[s].entertain;
        let g = &mut self.guests[gi];
        g.queue_ticks += 1;
        if entertain > 0.0 {
            g.happiness += entertain;
        } else {
            g.happiness -= p.queue_happiness_decay;
        }
        g.clamp();
        if g.queue_ticks as f64 > g.patience * p.queue_patience_ticks {
            self.slots[s].queue.retain(|&q| q != gi);
            self.refuse(gi, s);
        }
    }

    fn walking_tick(&mut self, gi: usize) {
        let g = &self.guests[gi];
        if g.energy <= 0.0 {
            return self.start_leaving(gi, REASON_TIRED);
        }
        if g.happiness <= 0.0 {
            return self.start_leaving(gi, REASON_UNHAPPY);
        }
        if let Some(t) = g.current_target {
            if !self.available(t) {
                self.guests[gi].current_target = None;
            }
        }
        if self.guests[gi].current_target.is_none() {
            self.choose(gi);
        }
        let Some(t) = self.guests[gi].current_target else {
            return;
        };
        if self.guests[gi].state == GuestState::Leaving {
            return;
        }
        let field = std::mem::take(&mut self.slots[t].field);
        let arrived = self.walk_step(gi, &field);
        self.slots[t].field = field;
        if arrived && !self.gone[gi] && self.guests[gi].current_target == Some(t) {
            self.arrive(gi, t);
        }
    }

    /// Moves one tile down `field`; returns whether the guest stands at a zero of it.
    fn walk_step(&mut self, gi: usize, field: &[u16]) -> bool {
        let p = self.p;
        let from = self.guests[gi].walk;
        let here = field[from as usize];
        if here == 0 {
            return true;
        }
        if here == UNREACHABLE {
            // Cannot happen for guests spawned at the entrance; leave rather than wander.
            self.guests[gi].current_target = None;
            return false;
        }
        let Some(to) = self.geo.step_down(from, field) else {
            return false;
        };
        let pos = self.geo.pos(to);
        let idx = pos.index();
        let c = (self.state.path_cleanliness[idx] - p.traffic_dirt).max(0.0);
        self.state.path_cleanliness[idx] = c;
        {
            let g = &mut self.guests[gi];
            g.walk = to;
            g.pos = pos;
            g.energy -= p.walk_energy;
            g.happiness -= p.dirty_tile_happiness * (1.0 - c);
            g.clamp();
        }
        self.impulse_visits(gi);
        field[to as usize] == 0
    }

    fn available(&self, s: usize) -> bool {
        let e = &self.state.entities[s];
        self.slots[s].reachable && !e.broken && !e.day.out_of_service
    }

    fn choose(&mut self, gi: usize) {
        let p = self.p;
        let g = &self.guests[gi];
        let factor = if g.informed || self.near_info_booth[g.walk as usize] { p.info_booth_distance_factor } else { 1.0 };
        let mut candidates: Vec<usize> = Vec::new();
        let mut utilities: Vec<f64> = Vec::new();
        let mut unaffordable = false;
        let mut any_ride = false;
        let mut food = false;
        let mut drink = false;
        let mut fresh_ride = false;
        for (s, slot) in self.slots.iter().enumerate() {
            let is_ride = slot.kind == Kind::Ride;
            if !slot.reachable || !(is_ride || matches!(slot.subtype, Subtype::Food | Subtype::Drink)) {
                continue;
            }
            any_ride |= is_ride;
            if !self.available(s) || g.avoid == Some(s) {
                continue;
            }
            let e = &self.state.entities[s];
            let need = match slot.subtype {
                Subtype::Food if g.hunger >= p.shop_interest_threshold => g.hunger,
                Subtype::Drink if g.thirst >= p.shop_interest_threshold => g.thirst,
                Subtype::Food | Subtype::Drink => continue,
                _ => ride_fun(g.preferred_intensity, slot.intensity, g.has_visited(s), p.repeat_ride_novelty),
            };
            if e.price > g.money {
                unaffordable = true;
                continue;
            }
            match slot.subtype {
                Subtype::Food => food = true,
                Subtype::Drink => drink = true,
                _ => fresh_ride |= !g.has_visited(s),
            }
            let features = CandidateFeatures {
                need,
                distance: slot.field[g.walk as usize] as f64,
                excitement: if is_ride { slot.effective_excitement } else { 0.0 },
                price: e.price as f64,
                max_price: slot.max_price as f64,
            };
            candidates.push(s);
            utilities.push(utility(p, &features, factor));
        }
        let hungry = g.hunger > p.need_threshold;
        let thirsty = g.thirst > p.need_threshold;
        if candidates.is_empty() {
            let reason = if unaffordable {
                REASON_MONEY
            } else if hungry {
                REASON_FOOD
            } else if thirsty {
                REASON_DRINK
            } else if !any_ride {
                REASON_RIDES
            } else {
                REASON_ATTRACTIONS
            };
            return self.start_leaving(gi, reason);
        }
        let bored = if hungry && !food {
            Some(REASON_FOOD)
        } else if thirsty && !drink {
            Some(REASON_DRINK)
        } else if !fresh_ride && !food && !drink {
            Some(REASON_ATTRACTIONS)
        } else {
            None
        };
        if let Some(reason) = bored {
            if self.rng.bernoulli(p.boredom_leave_probability) {
                return self.start_leaving(gi, reason);
            }
        }
        let probs = softmax(&utilities, p.choice_temperature);
        let pick = candidates[self.rng.weighted(&probs)];
        let g = &mut self.guests[gi];
        g.current_target = Some(pick);
        g.avoid = None;
        g.state = GuestState::Walking;
    }

    fn arrive(&mut self, gi: usize, s: usize) {
        let p = self.p;
        let c = self.state.entities[s].cleanliness;
        if !self.available(s) || (c < p.refuse_below_cleanliness && self.rng.bernoulli(1.0 - c)) {
            return self.refuse(gi, s);
        }
        if self.slots[s].kind == Kind::Ride {
            let g = &mut self.guests[gi];
            g.state = GuestState::Queueing;
            g.queue_ticks = 0;
            self.slots[s].queue.push_back(gi);
            return;
        }
        let price = self.state.entities[s].price;
        if self.guests[gi].money < price {
            return self.refuse(gi, s);
        }
        let sat = self.slots[s].satisfaction;
        let subtype = self.slots[s].subtype;
        {
            let g = &mut self.guests[gi];
            g.state = GuestState::Shopping;
            g.spend(price);
            match subtype {
                Subtype::Food => {
                    g.hunger -= sat;
                    g.food_shops_visited += 1;
                }
                _ => {
                    g.thirst -= sat;
                    g.drink_shops_visited += 1;
                }
            }
            g.clamp();
            g.current_target = None;
            g.state = GuestState::Walking;
        }
        self.sell(s, price, true);
    }

    /// Records one sale at a shop; `consumes` removes a unit of inventory.
    fn sell(&mut self, s: usize, price: i64, consumes: bool) {
        let p = self.p;
        let e = &mut self.state.entities[s];
        e.day.revenue += price;
        e.day.guests_served += 1;
        e.cleanliness = (e.cleanliness - p.shop_sale_dirt).max(0.0);
        if consumes {
            e.inventory = (e.inventory - 1).max(0);
            if e.inventory == 0 {
                e.day.out_of_service = true;
            }
        }
    }

    fn refuse(&mut self, gi: usize, s: usize) {
        let p = self.p;
        let g = &mut self.guests[gi];
        g.happiness -= p.refused_happiness;
        g.clamp();
        g.current_target = None;
        g.avoid = Some(s);
        g.state = GuestState::Walking;
    }

    fn impulse_visits(&mut self, gi: usize) {
        let w = self.guests[gi].walk as usize;
        if self.adjacent_specialty[w].is_empty() {
            return;
        }
        let nearby = self.adjacent_specialty[w].clone();
        for s in nearby {
            if !self.available(s) || !self.rng.bernoulli(self.p.specialty_impulse_probability) {
                continue;
            }
            self.specialty_visit(gi, s);
        }
    }

    fn specialty_visit(&mut self, gi: usize, s: usize) {
        let p = self.p;
        let price = self.state.entities[s].price;
        match self.slots[s].role {
            Some(Role::Atm) => {
                let g = &mut self.guests[gi];
                if g.money >= p.atm_low_money || g.bank_reserve <= 0 {
                    return;
                }
                let transfer = p.atm_transfer.min(g.bank_reserve);
                let fee = price.min(transfer);
                g.bank_reserve -= transfer;
                g.money += transfer;
                g.spend(fee);
                g.specialty_shops_visited += 1;
                self.sell(s, fee, false);
            }
            Some(Role::InfoBooth) => {
                let g = &mut self.guests[gi];
                if g.money < price || g.informed {
                    return;
                }
                g.spend(price);
                g.specialty_shops_visited += 1;
                g.informed = true;
                self.sell(s, price, false);
            }
            _ => {
                let g = &mut self.guests[gi];
                if g.souvenir_desire <= p.souvenir_threshold || g.money < price {
                    return;
                }
                g.spend(price);
                g.souvenir_desire = 0.0;
                g.happiness += p.souvenir_happiness;
                g.specialty_shops_visited += 1;
                g.clamp();
                self.sell(s, price, true);
            }
        }
    }

    fn start_leaving(&mut self, gi: usize, reason: &'static str) {
        let g = &mut self.guests[gi];
        g.state = GuestState::Leaving;
        g.current_target = None;
        g.exit_reason = Some(reason);
        if self.exit_field[g.walk as usize] == 0 || self.exit_field[g.walk as usize] == UNREACHABLE {
            self.finish(gi);
        }
    }

    fn finish(&mut self, gi: usize) {
        let g = &self.guests[gi];
        let reason = g.exit_reason.unwrap_or(REASON_TIRED);
        self.records.push(record(g, EXITED, reason));
        self.gone[gi] = true;
    }

    // ------------------------------------------------------------------- rides

    fn ride_step(&mut self, s: usize) {
        let p = self.p;
        if self.state.entities[s].broken {
            return;
        }
        self.state.entities[s].day.in_service_ticks += 1;
        if self.slots[s].busy > 0 {
            self.slots[s].busy -= 1;
            if self.slots[s].busy == 0 {
                self.finish_ride(s);
                let rate = self.slots[s].breakdown_rate;
                if breakdown_draw(&mut self.rng, rate) {
                    self.break_down(s);
                    return;
                }
            }
        }
        if self.slots[s].busy > 0 || self.slots[s].queue.is_empty() {
            return;
        }
        let price = self.state.entities[s].price;
        let mut boarded = 0u32;
        while boarded < self.slots[s].capacity {
            let Some(gi) = self.slots[s].queue.pop_front() else {
                break;
            };
            if self.guests[gi].money < price {
                self.refuse(gi, s);
                continue;
            }
            let g = &mut self.guests[gi];
            g.spend(price);
            g.state = GuestState::Riding;
            let waited = g.queue_ticks as u64;
            let e = &mut self.state.entities[s];
            e.day.revenue += price;
            e.day.wait_ticks += waited;
            e.day.waits += 1;
            self.slots[s].riders.push(gi);
            boarded += 1;
        }
        if boarded > 0 {
            let e = &mut self.state.entities[s];
            e.day.times_operated += 1;
            e.day.riders += boarded;
            e.day.guests_served += boarded;
            e.cleanliness = (e.cleanliness - p.ride_operation_dirt).max(0.0);
            self.slots[s].busy = self.slots[s].duration;
        }
    }

    fn finish_ride(&mut self, s: usize) {
        let p = self.p;
        let riders = std::mem::take(&mut self.slots[s].riders);
        let slot = &self.slots[s];
        for gi in riders {
            let g = &mut self.guests[gi];
            let fun = ride_fun(g.preferred_intensity, slot.intensity, g.has_visited(s), p.repeat_ride_novelty);
            g.happiness += p.ride_happiness * fun + p.ride_excitement_happiness * slot.effective_excitement * fun;
            g.energy -= p.ride_energy_per_intensity * slot.intensity;
            g.rides_visited += 1;
            if !g.has_visited(s) {
                g.visited.push(s);
            }
            g.current_target = None;
            g.state = GuestState::Walking;
            g.clamp();
        }
    }

    fn break_down(&mut self, s: usize) {
        self.breakdowns += 1;
        let e = &mut self.state.entities[s];
        e.broken = true;
        e.repair_points_remaining = self.slots[s].repair_points;
        let queued: Vec<usize> = self.slots[s].queue.drain(..).collect();
        for gi in queued {
            self.refuse(gi, s);
        }
    }

    // ------------------------------------------------------------------- staff

    fn staff_step(&mut self, st: usize) {
        let key = self.state.staff[st].key;
        let spec = self.catalog.spec(key.subtype, key.subclass);
        let Some(w) = self.geo.walk_id(self.state.staff[st].pos) else {
            return;
        };
        match key.subtype {
            Subtype::Janitor => self.janitor_step(st, w, spec.work_rate),
            Subtype::Mechanic => self.mechanic_step(st, w, spec.work_rate),
            _ => match spec.role {
                Some(Role::Stocker) => {
                    self.stocker_step(st, w, spec.work_rate);
                }
                Some(Role::Hybrid) => {
                    if !self.stocker_step(st, w, spec.work_rate) {
                        self.clown_step(st, w, spec.entertain_rate);
                    }
                }
                _ => self.clown_step(st, w, spec.entertain_rate),
            },
        }
    }

    fn move_staff(&mut self, st: usize, to: u16) {
        let m = &mut self.state.staff[st];
        m.pos = self.geo.pos(to);
        m.day.tiles_traversed += 1;
    }

    /// Nearest access tile of slot `s` from walk tile `w`, with its distance.
    fn nearest_access(&self, s: usize, w: u16) -> Option<(u16, u16)> {
        self.slots[s]
            .all_access
            .iter()
            .map(|&a| (a, self.geo.distance(w, a)))
            .filter(|&(_, d)| d != UNREACHABLE)
            .min_by_key(|&(_, d)| d)
    }

    /// Walks toward `target`; returns true when already there.
    fn approach(&mut self, st: usize, w: u16, target: u16) -> bool {
        if w == target {
            return true;
        }
        if let Some(next) = self.geo.step_toward(w, target) {
            self.move_staff(st, next);
        }
        false
    }

    /// Dirtiest tile or attraction within the patrol radius; ties go to the nearest.
    fn pick_janitor_job(&self, w: u16) -> Option<(u16, Option<usize>)> {
        let radius = self.p.janitor_patrol_radius;
        let here = self.geo.pos(w);
        // (cleanliness, distance, work tile, attraction)
        let mut best: Option<(f64, u16, u16, Option<usize>)> = None;
        let mut consider = |c: f64, d: u16, tile: u16, a: Option<usize>| {
            if c >= 1.0 || d == UNREACHABLE {
                return;
            }
            let better = match best {
                None => true,
                Some((bc, bd, _, _)) => c < bc || (c == bc && d < bd),
            };
            if better {
                best = Some((c, d, tile, a));
            }
        };
        for dy in -radius..=radius {
            let span = radius - dy.abs();
            for dx in -span..=span {
                let q = Pos::new(here.x + dx, here.y + dy);
                if let Some(v) = self.geo.walk_id(q) {
                    consider(self.state.path_cleanliness[q.index()], self.geo.distance(w, v), v, None);
                }
            }
        }
        for (s, slot) in self.slots.iter().enumerate() {
            if slot.pos.manhattan(here) > radius {
                continue;
            }
            if let Some((a, d)) = self.nearest_access(s, w) {
                consider(self.state.entities[s].cleanliness, d, a, Some(s));
            }
        }
        best.map(|(_, _, tile, a)| (tile, a))
    }

    fn job_cleanliness(&self, tile: u16, attraction: Option<usize>) -> f64 {
        match attraction {
            Some(s) => self.state.entities[s].cleanliness,
            None => self.state.path_cleanliness[self.geo.pos(tile).index()],
        }
    }

    fn janitor_step(&mut self, st: usize, w: u16, rate: f64) {
        let job = self.janitor_jobs[st].filter(|&(t, a)| self.job_cleanliness(t, a) < 1.0);
        let (tile, attraction) = match job {
            Some(j) => j,
            None => match self.pick_janitor_job(w) {
                Some(j) => j,
                None => {
                    self.janitor_jobs[st] = None;
                    return;
                }
            },
        };
        self.janitor_jobs[st] = Some((tile, attraction));
        if !self.approach(st, w, tile) {
            return;
        }
        let cleaned = match attraction {
            Some(s) => {
                let e = &mut self.state.entities[s];
                let amount = rate.min(1.0 - e.cleanliness);
                e.cleanliness += amount;
                amount
            }
            None => {
                let idx = self.geo.pos(tile).index();
                let amount = rate.min(1.0 - self.state.path_cleanliness[idx]);
                self.state.path_cleanliness[idx] += amount;
                amount
            }
        };
        let day = &mut self.state.staff[st].day;
        day.metric_value += cleaned;
        day.work_units += cleaned;
    }

    fn mechanic_step(&mut self, st: usize, w: u16, rate: f64) {
        let target = (0..self.slots.len())
            .filter(|&s| self.state.entities[s].broken)
            .filter_map(|s| self.nearest_access(s, w).map(|(a, d)| (d, s, a)))
            .min();
        let Some((_, s, tile)) = target else {
            return;
        };
        if !self.approach(st, w, tile) {
            return;
        }
        let e = &mut self.state.entities[s];
        let amount = rate.min(e.repair_points_remaining);
        e.repair_points_remaining -= amount;
        if e.repair_points_remaining <= 1e-9 {
            e.repair_points_remaining = 0.0;
            e.broken = false;
        }
        let day = &mut self.state.staff[st].day;
        day.metric_value += amount;
        day.work_units += amount;
    }

    fn clown_step(&mut self, st: usize, w: u16, rate: f64) {
        let mut target: Option<(usize, usize)> = None;
        for (s, slot) in self.slots.iter().enumerate() {
            let len = slot.queue.len();
            if len > 0 && target.map_or(true, |(_, best)| len > best) {
                target = Some((s, len));
            }
        }
        let Some((s, len)) = target else {
            return;
        };
        let Some((tile, _)) = self.nearest_access(s, w) else {
            return;
        };
        if !self.approach(st, w, tile) {
            return;
        }
        let slot = &mut self.slots[s];
        slot.entertain = slot.entertain.max(rate);
        let day = &mut self.state.staff[st].day;
        day.metric_value += len as f64;
        day.work_units += len as f64;
    }

    /// Restocks the emptiest low shop. Returns false when no shop needs stock.
    fn stocker_step(&mut self, st: usize, w: u16, rate: f64) -> bool {
        let threshold = self.p.restock_threshold;
        let mut target: Option<(f64, u16, usize, u16)> = None;
        for (s, slot) in self.slots.iter().enumerate() {
            if slot.kind != Kind::Shop || matches!(slot.role, Some(Role::Atm) | Some(Role::InfoBooth)) {
                continue;
            }
            let e = &self.state.entities[s];
            if e.order_quantity <= 0 || (e.inventory as f64) >= threshold * e.order_quantity as f64 {
                continue;
            }
            let Some((a, d)) = self.nearest_access(s, w) else {
                continue;
            };
            let ratio = e.inventory as f64 / e.order_quantity as f64;
            let better = match target {
                None => true,
                Some((br, bd, _, _)) => ratio < br || (ratio == br && d < bd),
            };
            if better {
                target = Some((ratio, d, s, a));
            }
        }
        let Some((_, _, s, tile)) = target else {
            return false;
        };
        if !self.approach(st, w, tile) {
            return true;
        }
        let e = &mut self.state.entities[s];
        let units = (rate.floor() as i64).max(1).min(e.order_quantity - e.inventory);
        e.inventory += units;
        e.day.restocked_units += units;
        if e.inventory >= e.order_quantity {
            e.day.restocks += 1;
        }
        let day = &mut self.state.staff[st].day;
        day.metric_value += units as f64;
        day.work_units += units as f64;
        true
    }
}

fn record(g: &Guest, exit_or_stay: &str, reason: &str) -> GuestRecord {
    GuestRecord {
        happiness: g.happiness,
        hunger: g.hunger,
        thirst: g.thirst,
        money_remaining: g.money,
        exit_or_stay: exit_or_stay.to_string(),
        reason: reason.to_string(),
        time_in_park: g.time_in_park,
        money_spent: g.money_spent,
        rides_visited: g.rides_visited,
        food_shops_visited: g.food_shops_visited,
        drink_shops_visited: g.drink_shops_visited,
        specialty_shops_visited: g.specialty_shops_visited,
    }
}
