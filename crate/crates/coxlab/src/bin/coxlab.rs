fn main() { println!("coxlab CLI placeholder"); }
