//! Porter suffix-stripping stemmer.
//!
//! The classic five-step algorithm, matching the author's reference C
//! implementation including its two documented departures from the
//! original published rules ("bli" -> "ble" in step 2, plus the
//! "logi" -> "log" rule). Input is expected to be lowercase; words
//! shorter than three letters and words containing non-ASCII-alphabetic
//! characters pass through unchanged.

struct Porter {
    b: Vec<u8>,
    /// Current end of the word (exclusive).
    len: usize,
    /// End of the stem left after the last successful `ends` match.
    j: usize,
}

impl Porter {
    fn new(word: &str) -> Self {
        Porter {
            b: word.as_bytes().to_vec(),
            len: word.len(),
            j: 0,
        }
    }

    /// True when b[i] is a consonant. `y` counts as a consonant at the
    /// start of the word or after a vowel.
    fn is_cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_cons(i - 1),
            _ => true,
        }
    }

    /// Porter's measure of b[0..upto]: the number of VC sequences.
    fn measure(&self, upto: usize) -> usize {
        let mut i = 0;
        while i < upto && self.is_cons(i) {
            i += 1;
        }
        if i == upto {
            return 0;
        }
        let mut m = 0;
        loop {
            while i < upto && !self.is_cons(i) {
                i += 1;
            }
            if i == upto {
                return m;
            }
            m += 1;
            while i < upto && self.is_cons(i) {
                i += 1;
            }
            if i == upto {
                return m;
            }
        }
    }

    fn stem_measure(&self) -> usize {
        self.measure(self.j)
    }

    fn has_vowel(&self, upto: usize) -> bool {
        (0..upto).any(|i| !self.is_cons(i))
    }

    /// Last two letters form a double consonant.
    fn double_cons(&self, upto: usize) -> bool {
        upto >= 2 && self.b[upto - 1] == self.b[upto - 2] && self.is_cons(upto - 1)
    }

    /// b[0..upto] ends consonant-vowel-consonant where the final
    /// consonant is not w, x or y.
    fn cvc(&self, upto: usize) -> bool {
        if upto < 3 || !self.is_cons(upto - 1) || self.is_cons(upto - 2) || !self.is_cons(upto - 3)
        {
            return false;
        }
        !matches!(self.b[upto - 1], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, suffix: &[u8]) -> bool {
        if suffix.len() > self.len {
            return false;
        }
        if &self.b[self.len - suffix.len()..self.len] == suffix {
            self.j = self.len - suffix.len();
            true
        } else {
            false
        }
    }

    fn set_to(&mut self, s: &[u8]) {
        self.b.truncate(self.j);
        self.b.extend_from_slice(s);
        self.len = self.b.len();
    }

    /// Replace the matched suffix when the stem has measure > 0.
    fn replace(&mut self, s: &[u8]) {
        if self.stem_measure() > 0 {
            self.set_to(s);
        }
    }

    /// Plurals and -ed / -ing.
    fn step_1ab(&mut self) {
        if self.b[self.len - 1] == b's' {
            if self.ends(b"sses") {
                self.len -= 2;
            } else if self.ends(b"ies") {
                self.set_to(b"i");
            } else if self.len >= 2 && self.b[self.len - 2] != b's' {
                self.len -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.stem_measure() > 0 {
                self.len -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing")) && self.has_vowel(self.j) {
            self.len = self.j;
            if self.ends(b"at") {
                self.set_to(b"ate");
            } else if self.ends(b"bl") {
                self.set_to(b"ble");
            } else if self.ends(b"iz") {
                self.set_to(b"ize");
            } else if self.double_cons(self.len) {
                if !matches!(self.b[self.len - 1], b'l' | b's' | b'z') {
                    self.len -= 1;
                }
            } else if self.measure(self.len) == 1 && self.cvc(self.len) {
                self.j = self.len;
                self.set_to(b"e");
            }
        }
    }

    /// Terminal y -> i when the stem contains another vowel.
    fn step_1c(&mut self) {
        if self.ends(b"y") && self.has_vowel(self.j) {
            self.b[self.len - 1] = b'i';
        }
    }

    fn step_2(&mut self) {
        if self.len < 2 {
            return;
        }
        match self.b[self.len - 2] {
            b'a' => {
                if self.ends(b"ational") {
                    self.replace(b"ate");
                } else if self.ends(b"tional") {
                    self.replace(b"tion");
                }
            }
            b'c' => {
                if self.ends(b"enci") {
                    self.replace(b"ence");
                } else if self.ends(b"anci") {
                    self.replace(b"ance");
                }
            }
            b'e' => {
                if self.ends(b"izer") {
                    self.replace(b"ize");
                }
            }
            b'l' => {
                if self.ends(b"bli") {
                    self.replace(b"ble");
                } else if self.ends(b"alli") {
                    self.replace(b"al");
                } else if self.ends(b"entli") {
                    self.replace(b"ent");
                } else if self.ends(b"eli") {
                    self.replace(b"e");
                } else if self.ends(b"ousli") {
                    self.replace(b"ous");
                }
            }
            b'o' => {
                if self.ends(b"ization") {
                    self.replace(b"ize");
                } else if self.ends(b"ation") || self.ends(b"ator") {
                    self.replace(b"ate");
                }
            }
            b's' => {
                if self.ends(b"alism") {
                    self.replace(b"al");
                } else if self.ends(b"iveness") {
                    self.replace(b"ive");
                } else if self.ends(b"fulness") {
                    self.replace(b"ful");
                } else if self.ends(b"ousness") {
                    self.replace(b"ous");
                }
            }
            b't' => {
                if self.ends(b"aliti") {
                    self.replace(b"al");
                } else if self.ends(b"iviti") {
                    self.replace(b"ive");
                } else if self.ends(b"biliti") {
                    self.replace(b"ble");
                }
            }
            b'g' => {
                if self.ends(b"logi") {
                    self.replace(b"log");
                }
            }
            _ => {}
        }
    }

    fn step_3(&mut self) {
        match self.b[self.len - 1] {
            b'e' => {
                if self.ends(b"icate") {
                    self.replace(b"ic");
                } else if self.ends(b"ative") {
                    self.replace(b"");
                } else if self.ends(b"alize") {
                    self.replace(b"al");
                }
            }
            b'i' => {
                if self.ends(b"iciti") {
                    self.replace(b"ic");
                }
            }
            b'l' => {
                if self.ends(b"ical") {
                    self.replace(b"ic");
                } else if self.ends(b"ful") {
                    self.replace(b"");
                }
            }
            b's' => {
                if self.ends(b"ness") {
                    self.replace(b"");
                }
            }
            _ => {}
        }
    }

    fn step_4(&mut self) {
        if self.len < 2 {
            return;
        }
        let matched = match self.b[self.len - 2] {
            b'a' => self.ends(b"al"),
            b'c' => self.ends(b"ance") || self.ends(b"ence"),
            b'e' => self.ends(b"er"),
            b'i' => self.ends(b"ic"),
            b'l' => self.ends(b"able") || self.ends(b"ible"),
            b'n' => {
                self.ends(b"ant")
                    || self.ends(b"ement")
                    || self.ends(b"ment")
                    || self.ends(b"ent")
            }
            b'o' => {
                (self.ends(b"ion")
                    && self.j >= 1
                    && matches!(self.b[self.j - 1], b's' | b't'))
                    || self.ends(b"ou")
            }
            b's' => self.ends(b"ism"),
            b't' => self.ends(b"ate") || self.ends(b"iti"),
            b'u' => self.ends(b"ous"),
            b'v' => self.ends(b"ive"),
            b'z' => self.ends(b"ize"),
            _ => false,
        };
        if matched && self.stem_measure() > 1 {
            self.len = self.j;
        }
    }

    /// Remove a final -e and reduce -ll, in long enough stems.
    fn step_5(&mut self) {
        self.j = self.len;
        if self.b[self.len - 1] == b'e' {
            let m = self.measure(self.len);
            if m > 1 || (m == 1 && !self.cvc(self.len - 1)) {
                self.len -= 1;
            }
        }
        if self.b[self.len - 1] == b'l' && self.double_cons(self.len) && self.measure(self.len) > 1
        {
            self.len -= 1;
        }
    }

    fn run(mut self) -> String {
        if self.len > 2 {
            self.step_1ab();
            self.step_1c();
            self.step_2();
            self.step_3();
            self.step_4();
            self.step_5();
        }
        self.b.truncate(self.len);
        String::from_utf8(self.b).expect("ascii in, ascii out")
    }
}

/// Stem a single lowercase word.
pub fn stem(word: &str) -> String {
    if word.len() < 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    Porter::new(word).run()
}
