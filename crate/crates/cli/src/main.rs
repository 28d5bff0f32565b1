fn main() { let _ = siolab::placeholder(); }
