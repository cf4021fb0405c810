//! Problem data: products, machines, technologies and per-machine setup times.
//!
//! All identifiers are zero-based inside the library. The JSON file format
//! ([`InstanceFile`]) uses one-based ids, matching how instances are usually
//! written down by hand.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack used when checking the triangle inequality on setups.
pub const TRIANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("instance has no products")]
    NoProducts,
    #[error("instance has no machines")]
    NoMachines,
    #[error("product {0} has non-positive or non-finite volume {1}")]
    BadVolume(usize, f64),
    #[error("product {0} lists no technologies")]
    EmptyProduct(usize),
    #[error("technology {0} has non-positive or non-finite rate {1}")]
    BadRate(usize, f64),
    #[error("technology {0} uses no machines")]
    EmptyMachineSet(usize),
    #[error("technology {tech} references machine {machine} outside 1..={machines}")]
    UnknownMachine {
        tech: usize,
        machine: usize,
        machines: usize,
    },
    #[error("technology {tech} lists machine {machine} twice")]
    DuplicateMachine { tech: usize, machine: usize },
    #[error("technology {0} references an unknown product")]
    UnknownProduct(usize),
    #[error("product {product} lists unknown technology {tech}")]
    UnknownTechnology { product: usize, tech: usize },
    #[error("technology {tech} is owned by product {owner} but listed by product {product}")]
    OwnershipMismatch {
        tech: usize,
        owner: usize,
        product: usize,
    },
    #[error("technology {0} is not listed by its product")]
    UnlistedTechnology(usize),
    #[error("declared k = {declared} but {actual} products given")]
    ProductCount { declared: usize, actual: usize },
    #[error("setup matrix for machine {0} has the wrong shape")]
    SetupShape(usize),
    #[error("setup on machine {machine} from {from} to {to} is negative or non-finite ({value})")]
    BadSetup {
        machine: usize,
        from: usize,
        to: usize,
        value: f64,
    },
    #[error("setup on machine {machine} for technology {tech} to itself must be zero")]
    NonZeroDiagonal { machine: usize, tech: usize },
    #[error("setup on machine {machine} from {from} to {to} refers to a technology not using the machine")]
    SetupOutsideMachine {
        machine: usize,
        from: usize,
        to: usize,
    },
    #[error("setup on machine {machine} from {from} to {to} is missing")]
    MissingSetup {
        machine: usize,
        from: usize,
        to: usize,
    },
    #[error("setup on machine {machine} from {from} to {to} is given twice")]
    DuplicateSetup {
        machine: usize,
        from: usize,
        to: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    /// Required production volume, `V_i > 0`.
    pub volume: f64,
    /// Technologies able to produce this product (the set `U_i`).
    pub technologies: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Technology {
    pub product: usize,
    /// Machines occupied simultaneously while the technology runs.
    pub machines: Vec<usize>,
    /// Output per unit time.
    pub rate: f64,
}

/// A validated scheduling instance.
///
/// Setup times are stored as one dense `d x d` matrix per machine; entries for
/// technologies that do not use the machine are zero and never consulted.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    products: Vec<Product>,
    num_machines: usize,
    technologies: Vec<Technology>,
    setups: Vec<Vec<f64>>,
    machine_techs: Vec<Vec<usize>>,
}

impl Instance {
    /// Builds an instance from its parts. `setups[l]` is a row-major
    /// `d x d` matrix for machine `l`.
    pub fn new(
        num_machines: usize,
        products: Vec<Product>,
        technologies: Vec<Technology>,
        setups: Vec<Vec<f64>>,
    ) -> Result<Self, InstanceError> {
        if products.is_empty() {
            return Err(InstanceError::NoProducts);
        }
        if num_machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        let d = technologies.len();
        for (i, p) in products.iter().enumerate() {
            if !(p.volume.is_finite() && p.volume > 0.0) {
                return Err(InstanceError::BadVolume(i, p.volume));
            }
            if p.technologies.is_empty() {
                return Err(InstanceError::EmptyProduct(i));
            }
            for &u in &p.technologies {
                let Some(tech) = technologies.get(u) else {
                    return Err(InstanceError::UnknownTechnology {
                        product: i,
                        tech: u,
                    });
                };
                if tech.product != i {
                    return Err(InstanceError::OwnershipMismatch {
                        tech: u,
                        owner: tech.product,
                        product: i,
                    });
                }
            }
        }
        for (u, t) in technologies.iter().enumerate() {
            if !(t.rate.is_finite() && t.rate > 0.0) {
                return Err(InstanceError::BadRate(u, t.rate));
            }
            if t.machines.is_empty() {
                return Err(InstanceError::EmptyMachineSet(u));
            }
            let mut seen = vec![false; num_machines];
            for &l in &t.machines {
                if l >= num_machines {
                    return Err(InstanceError::UnknownMachine {
                        tech: u,
                        machine: l,
                        machines: num_machines,
                    });
                }
                if std::mem::replace(&mut seen[l], true) {
                    return Err(InstanceError::DuplicateMachine {
                        tech: u,
                        machine: l,
                    });
                }
            }
            let Some(owner) = products.get(t.product) else {
                return Err(InstanceError::UnknownProduct(u));
            };
            // Listing twice would double count the technology in U_i.
            match owner.technologies.iter().filter(|&&v| v == u).count() {
                1 => {}
                0 => return Err(InstanceError::UnlistedTechnology(u)),
                _ => {
                    return Err(InstanceError::OwnershipMismatch {
                        tech: u,
                        owner: t.product,
                        product: t.product,
                    })
                }
            }
        }

        let mut machine_techs = vec![Vec::new(); num_machines];
        for (u, t) in technologies.iter().enumerate() {
            for &l in &t.machines {
                machine_techs[l].push(u);
            }
        }

        if setups.len() != num_machines {
            return Err(InstanceError::SetupShape(setups.len().min(num_machines)));
        }
        let mut setups = setups;
        for (l, matrix) in setups.iter_mut().enumerate() {
            if matrix.len() != d * d {
                return Err(InstanceError::SetupShape(l));
            }
            let uses = |u: usize| technologies[u].machines.contains(&l);
            for u in 0..d {
                for q in 0..d {
                    let value = matrix[u * d + q];
                    if !uses(u) || !uses(q) {
                        // Irrelevant entries are normalised away.
                        matrix[u * d + q] = 0.0;
                        continue;
                    }
                    if !(value.is_finite() && value >= 0.0) {
                        return Err(InstanceError::BadSetup {
                            machine: l,
                            from: u,
                            to: q,
                            value,
                        });
                    }
                    if u == q && value != 0.0 {
                        return Err(InstanceError::NonZeroDiagonal {
                            machine: l,
                            tech: u,
                        });
                    }
                }
            }
        }

        Ok(Self {
            products,
            num_machines,
            technologies,
            setups,
            machine_techs,
        })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn technologies(&self) -> &[Technology] {
        &self.technologies
    }

    pub fn num_products(&self) -> usize {
        self.products.len()
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn num_technologies(&self) -> usize {
        self.technologies.len()
    }

    /// Technologies that use machine `l` (the set `K_l`), in ascending order.
    pub fn machine_techs(&self, l: usize) -> &[usize] {
        &self.machine_techs[l]
    }

    /// Setup time on machine `l` when switching from technology `from` to `to`.
    pub fn setup(&self, l: usize, from: usize, to: usize) -> f64 {
        let d = self.technologies.len();
        self.setups[l][from * d + to]
    }

    /// Raw row-major setup matrix of machine `l`.
    pub fn setup_matrix(&self, l: usize) -> &[f64] {
        &self.setups[l]
    }

    /// Longest single run a product could ever need: `max_{q in U_i} V_i / a_q`.
    pub fn max_run_length(&self, product: usize) -> f64 {
        let p = &self.products[product];
        p.technologies
            .iter()
            .map(|&q| p.volume / self.technologies[q].rate)
            .fold(0.0, f64::max)
    }

    pub fn max_setup(&self) -> f64 {
        (0..self.num_machines)
            .flat_map(|l| {
                let techs = &self.machine_techs[l];
                techs
                    .iter()
                    .flat_map(move |&u| techs.iter().map(move |&q| (u, q)))
                    .map(move |(u, q)| self.setup(l, u, q))
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound on the optimal makespan, also used as the big-M constant:
    /// every product made by its slowest technology, back to back, with the
    /// worst setup between consecutive products.
    pub fn horizon(&self) -> f64 {
        let production: f64 = (0..self.num_products())
            .map(|i| self.max_run_length(i))
            .sum();
        production + (self.num_products() - 1) as f64 * self.max_setup()
    }

    /// `sum_l |K_l|`, the total number of (technology, machine) incidences.
    pub fn incidence_count(&self) -> usize {
        self.machine_techs.iter().map(Vec::len).sum()
    }

    /// `sum_l |K_l|^2`.
    pub fn incidence_square_sum(&self) -> usize {
        self.machine_techs.iter().map(|k| k.len() * k.len()).sum()
    }

    /// True when `s[l][u][q] + s[l][q][p] >= s[l][u][p]` for every machine and
    /// every ordered triple of technologies using it.
    pub fn satisfies_triangle(&self) -> bool {
        (0..self.num_machines).all(|l| {
            let techs = &self.machine_techs[l];
            techs.iter().all(|&u| {
                techs.iter().all(|&q| {
                    techs.iter().all(|&p| {
                        self.setup(l, u, q) + self.setup(l, q, p) + TRIANGLE_TOL
                            >= self.setup(l, u, p)
                    })
                })
            })
        })
    }

    /// Replaces every machine's setup matrix by its shortest-path closure.
    pub fn metric_closure(&self) -> Instance {
        let d = self.technologies.len();
        let mut out = self.clone();
        for l in 0..self.num_machines {
            let techs = &self.machine_techs[l];
            let s = &mut out.setups[l];
            for &via in techs {
                for &u in techs {
                    for &p in techs {
                        let through = s[u * d + via] + s[via * d + p];
                        if through < s[u * d + p] {
                            s[u * d + p] = through;
                        }
                    }
                }
            }
        }
        out
    }

    /// Returns a copy with volumes and setups multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for p in &mut out.products {
            p.volume *= factor;
        }
        for matrix in &mut out.setups {
            for v in matrix.iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    pub fn to_file(&self) -> InstanceFile {
        let d = self.num_technologies();
        let mut setups = Vec::new();
        for l in 0..self.num_machines {
            for &u in &self.machine_techs[l] {
                for &q in &self.machine_techs[l] {
                    if u != q {
                        setups.push(SetupEntry {
                            machine: l + 1,
                            from: u + 1,
                            to: q + 1,
                            duration: self.setups[l][u * d + q],
                        });
                    }
                }
            }
        }
        InstanceFile {
            k: self.num_products(),
            m: self.num_machines,
            products: self
                .products
                .iter()
                .map(|p| ProductEntry {
                    volume: p.volume,
                    technologies: p.technologies.iter().map(|u| u + 1).collect(),
                })
                .collect(),
            technologies: self
                .technologies
                .iter()
                .map(|t| TechnologyEntry {
                    product: t.product + 1,
                    machines: t.machines.iter().map(|l| l + 1).collect(),
                    rate: t.rate,
                })
                .collect(),
            setups,
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self, InstanceError> {
        if file.k != file.products.len() {
            return Err(InstanceError::ProductCount {
                declared: file.k,
                actual: file.products.len(),
            });
        }
        let m = file.m;
        let d = file.technologies.len();
        // One-based ids; 0 wraps to usize::MAX and fails range checks below.
        let zb = |id: usize| id.wrapping_sub(1);
        let products = file
            .products
            .iter()
            .map(|p| Product {
                volume: p.volume,
                technologies: p.technologies.iter().map(|&u| zb(u)).collect(),
            })
            .collect();
        let technologies: Vec<Technology> = file
            .technologies
            .iter()
            .map(|t| Technology {
                product: zb(t.product),
                machines: t.machines.iter().map(|&l| zb(l)).collect(),
                rate: t.rate,
            })
            .collect();

        let mut matrices = vec![vec![0.0; d * d]; m];
        let mut given = vec![vec![false; d * d]; m];
        for e in &file.setups {
            let (l, u, q) = (zb(e.machine), zb(e.from), zb(e.to));
            let on_machine =
                |t: usize| l < m && technologies.get(t).is_some_and(|t| t.machines.contains(&l));
            if !on_machine(u) || !on_machine(q) {
                return Err(InstanceError::SetupOutsideMachine {
                    machine: e.machine,
                    from: e.from,
                    to: e.to,
                });
            }
            if std::mem::replace(&mut given[l][u * d + q], true) {
                return Err(InstanceError::DuplicateSetup {
                    machine: e.machine,
                    from: e.from,
                    to: e.to,
                });
            }
            matrices[l][u * d + q] = e.duration;
        }
        let inst = Instance::new(m, products, technologies, matrices)?;
        for (l, given) in given.iter().enumerate() {
            for &u in inst.machine_techs(l) {
                for &q in inst.machine_techs(l) {
                    if u != q && !given[u * d + q] {
                        return Err(InstanceError::MissingSetup {
                            machine: l + 1,
                            from: u + 1,
                            to: q + 1,
                        });
                    }
                }
            }
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceJsonError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Ok(Self::from_file(&file)?)
    }
}

#[derive(Debug, Error)]
pub enum InstanceJsonError {
    #[error("malformed instance JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
}

/// On-disk instance layout. Ids are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub k: usize,
    pub m: usize,
    pub products: Vec<ProductEntry>,
    pub technologies: Vec<TechnologyEntry>,
    #[serde(default)]
    pub setups: Vec<SetupEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub volume: f64,
    pub technologies: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologyEntry {
    pub product: usize,
    pub machines: Vec<usize>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupEntry {
    pub machine: usize,
    pub from: usize,
    pub to: usize,
    pub duration: f64,
}
