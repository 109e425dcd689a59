/// Hyperparameters and schedule settings for the embedding topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of topics `K`.
    pub num_topics: usize,
    /// Embedding dimension `M`, shared by topics and documents.
    pub embed_dim: usize,
    /// Prior precision of topic embeddings.
    pub alpha: f64,
    /// Symmetric Dirichlet prior on topic word distributions.
    pub beta: f64,
    /// Prior precision of document embeddings.
    pub rho: f64,
    /// Precision of topic weights around `U a_d`.
    pub tau: f64,
    /// `K_s`: topic weights kept exactly per document during sampling.
    pub doc_top_topics: usize,
    /// `V_s`: word weights kept per topic.
    pub topic_top_words: usize,
    /// `s`: minimum number of topics retaining each word.
    pub min_word_topics: usize,
    /// `T`: reparameterization samples per gradient.
    pub mc_samples: usize,
    pub batch_size: usize,
    pub max_inner_iters: usize,
    /// Inner loop stops once `‖Δξ‖∞` falls below this.
    pub inner_tol: f64,
    /// Training stops once consecutive held-out per-word log-likelihoods
    /// differ by less than this.
    pub outer_tol: f64,
    pub max_epochs: usize,
    /// Held-out evaluations per pass over the training set (at least 1).
    pub evals_per_epoch: usize,
    pub adagrad_step: f64,
    /// Symmetric Dirichlet prior on document topic proportions, LDA baseline only.
    pub lda_doc_prior: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Defaults for `K` topics: `M = 50`, `K_s = 50`, `V_s = 100`,
    /// `α = ρ = 0.1`, `τ = 1`, `β = 1/K`. For `K <= 50`, `M` is lowered to
    /// `K − 1` and `K_s` to `K`.
    pub fn new(num_topics: usize) -> Self {
        let inv_k = 1.0 / num_topics.max(1) as f64;
        Self {
            num_topics,
            embed_dim: 50.min(num_topics.saturating_sub(1)),
            alpha: 0.1,
            beta: inv_k,
            rho: 0.1,
            tau: 1.0,
            doc_top_topics: 50.min(num_topics.max(1)),
            topic_top_words: 100,
            min_word_topics: 3,
            mc_samples: 1,
            batch_size: 500,
            max_inner_iters: 20,
            inner_tol: 1e-3,
            outer_tol: 1e-3,
            max_epochs: 50,
            evals_per_epoch: 1,
            adagrad_step: 0.5,
            lda_doc_prior: inv_k,
            seed: 0,
        }
    }

    /// `σ_d`, the fixed standard deviation of each topic weight.
    pub fn topic_weight_std(&self) -> f64 {
        self.tau.powf(-0.5)
    }

    /// Every violated constraint, not just the first.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.num_topics == 0 {
            errors.push("K must be at least 1".to_string());
        }
        if self.embed_dim >= self.num_topics {
            errors.push(format!("M must be < K (M={}, K={})", self.embed_dim, self.num_topics));
        }
        for (name, v) in [("alpha", self.alpha), ("rho", self.rho), ("tau", self.tau)] {
            if !(v > 0.0) || !v.is_finite() {
                errors.push(format!("precision must be positive: {name}={v}"));
            }
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            errors.push(format!("beta must be positive (beta={})", self.beta));
        }
        if !(self.lda_doc_prior > 0.0) || !self.lda_doc_prior.is_finite() {
            errors.push(format!("lda_doc_prior must be positive ({})", self.lda_doc_prior));
        }
        if self.doc_top_topics == 0 {
            errors.push("K_s must be at least 1".to_string());
        }
        if self.doc_top_topics > self.num_topics {
            errors.push(format!(
                "K_s must be <= K (K_s={}, K={})",
                self.doc_top_topics, self.num_topics
            ));
        }
        if self.topic_top_words == 0 {
            errors.push("V_s must be at least 1".to_string());
        }
        if self.min_word_topics == 0 {
            errors.push("s must be at least 1".to_string());
        }
        if self.mc_samples == 0 {
            errors.push("T must be at least 1".to_string());
        }
        if self.batch_size == 0 {
            errors.push("batch size must be at least 1".to_string());
        }
        if self.max_inner_iters == 0 {
            errors.push("max inner iterations must be at least 1".to_string());
        }
        if !(self.inner_tol >= 0.0) {
            errors.push(format!("inner tolerance must be non-negative ({})", self.inner_tol));
        }
        if !(self.outer_tol >= 0.0) {
            errors.push(format!("outer tolerance must be non-negative ({})", self.outer_tol));
        }
        if self.max_epochs == 0 {
            errors.push("max epochs must be at least 1".to_string());
        }
        if self.evals_per_epoch == 0 {
            errors.push("evaluations per epoch must be at least 1".to_string());
        }
        if !(self.adagrad_step > 0.0) || !self.adagrad_step.is_finite() {
            errors.push(format!("adagrad step must be positive ({})", self.adagrad_step));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// [`validate`](Self::validate) plus the vocabulary-dependent `V_s <= V`.
    pub fn validate_for_vocab(&self, num_words: usize) -> Result<(), Vec<String>> {
        let mut errors = self.validate().err().unwrap_or_default();
        if num_words == 0 {
            errors.push("vocabulary is empty".to_string());
        }
        if self.topic_top_words > num_words {
            errors.push(format!(
                "V_s must be <= V (V_s={}, V={num_words})",
                self.topic_top_words
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub(crate) fn checked(&self, num_words: usize) -> crate::Result<()> {
        self.validate_for_vocab(num_words).map_err(crate::Error::InvalidConfig)
    }

    /// Every field as a `(key, value)` pair, in a fixed order. Floats use the
    /// shortest representation that parses back to the same bits.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |v: f64| format!("{v:e}");
        vec![
            ("k", self.num_topics.to_string()),
            ("m", self.embed_dim.to_string()),
            ("alpha", f(self.alpha)),
            ("beta", f(self.beta)),
            ("rho", f(self.rho)),
            ("tau", f(self.tau)),
            ("ks", self.doc_top_topics.to_string()),
            ("vs", self.topic_top_words.to_string()),
            ("smin", self.min_word_topics.to_string()),
            ("samples", self.mc_samples.to_string()),
            ("batch", self.batch_size.to_string()),
            ("inner_iters", self.max_inner_iters.to_string()),
            ("inner_tol", f(self.inner_tol)),
            ("tol", f(self.outer_tol)),
            ("max_epochs", self.max_epochs.to_string()),
            ("evals_per_epoch", self.evals_per_epoch.to_string()),
            ("adagrad_step", f(self.adagrad_step)),
            ("lda_prior", f(self.lda_doc_prior)),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Sets one field by its [`entries`](Self::entries) key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .trim()
                .parse()
                .map_err(|_| format!("invalid value for {key}: {value:?}"))
        }
        match key {
            "k" => self.num_topics = num(key, value)?,
            "m" => self.embed_dim = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "ks" => self.doc_top_topics = num(key, value)?,
            "vs" => self.topic_top_words = num(key, value)?,
            "smin" => self.min_word_topics = num(key, value)?,
            "samples" => self.mc_samples = num(key, value)?,
            "batch" => self.batch_size = num(key, value)?,
            "inner_iters" => self.max_inner_iters = num(key, value)?,
            "inner_tol" => self.inner_tol = num(key, value)?,
            "tol" => self.outer_tol = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "evals_per_epoch" => self.evals_per_epoch = num(key, value)?,
            "adagrad_step" => self.adagrad_step = num(key, value)?,
            "lda_prior" => self.lda_doc_prior = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}
