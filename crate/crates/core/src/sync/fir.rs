use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Streaming real-tap FIR on complex samples. The history is stored twice so every output
/// is a dot product over one contiguous slice.
#[derive(Debug, Clone)]
pub(crate) struct Fir {
    rev_taps: Vec<f64>,
    buf: Vec<Complex64>,
    pos: usize,
}

impl Fir {
    pub(crate) fn new(taps: &[f64]) -> Self {
        let l = taps.len();
        Fir {
            rev_taps: taps.iter().rev().copied().collect(),
            buf: vec![ZERO; 2 * l],
            pos: 0,
        }
    }

    pub(crate) fn push(&mut self, x: Complex64) -> Complex64 {
        let l = self.rev_taps.len();
        self.buf[self.pos] = x;
        self.buf[self.pos + l] = x;
        self.pos = (self.pos + 1) % l;
        // oldest sample first, matching reversed taps
        let win = &self.buf[self.pos..self.pos + l];
        let (mut re, mut im) = (0.0, 0.0);
        for (s, h) in win.iter().zip(&self.rev_taps) {
            re += s.re * h;
            im += s.im * h;
        }
        Complex64::new(re, im)
    }
}

/// Polyphase interpolator: one input symbol per `sps` output samples.
#[derive(Debug, Clone)]
pub(crate) struct Upsampler {
    /// `phases[p][j] = taps[p + j * sps]`
    phases: Vec<Vec<f64>>,
    hist: Vec<Complex64>,
    pos: usize,
    sps: usize,
    phase: usize,
}

impl Upsampler {
    pub(crate) fn new(taps: &[f64], sps: usize) -> Self {
        let per = taps.len().div_ceil(sps);
        let phases = (0..sps)
            .map(|p| (0..per).map(|j| taps.get(p + j * sps).copied().unwrap_or(0.0)).collect())
            .collect();
        Upsampler {
            phases,
            hist: vec![ZERO; 2 * per],
            pos: 0,
            sps,
            phase: 0,
        }
    }

    /// True when the next call to [`Upsampler::next`] needs a fresh symbol.
    pub(crate) fn wants_symbol(&self) -> bool {
        self.phase == 0
    }

    pub(crate) fn push_symbol(&mut self, a: Complex64) {
        let per = self.hist.len() / 2;
        self.pos = (self.pos + per - 1) % per;
        self.hist[self.pos] = a;
        self.hist[self.pos + per] = a;
    }

    /// Next output sample; `hist[pos]` is the newest symbol.
    pub(crate) fn next(&mut self) -> Complex64 {
        let per = self.hist.len() / 2;
        let h = &self.phases[self.phase];
        let win = &self.hist[self.pos..self.pos + per];
        let (mut re, mut im) = (0.0, 0.0);
        for (s, g) in win.iter().zip(h) {
            re += s.re * g;
            im += s.im * g;
        }
        self.phase = (self.phase + 1) % self.sps;
        Complex64::new(re, im)
    }
}
