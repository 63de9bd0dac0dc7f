//! Small embedded word lists for realistic-looking identifiers.

pub const GIVEN_NAMES: &[&str] = &[
    "James", "Mary", "John", "Patricia", "Robert", "Jennifer", "Michael", "Linda", "William",
    "Elizabeth", "David", "Barbara", "Richard", "Susan", "Joseph", "Jessica", "Thomas", "Sarah",
    "Charles", "Karen", "Christopher", "Nancy", "Daniel", "Lisa", "Matthew", "Betty", "Anthony",
    "Margaret", "Mark", "Sandra", "Donald", "Ashley", "Steven", "Kimberly", "Paul", "Emily",
    "Andrew", "Donna", "Joshua", "Michelle", "Kenneth", "Dorothy", "Kevin", "Carol", "Brian",
    "Amanda", "George", "Melissa", "Edward", "Deborah", "Ronald", "Stephanie", "Timothy",
    "Rebecca", "Jason", "Sharon", "Jeffrey", "Laura", "Ryan", "Cynthia", "Jacob", "Kathleen",
    "Gary", "Amy", "Nicholas", "Shirley", "Eric", "Angela", "Jonathan", "Helen", "Stephen",
    "Anna", "Larry", "Brenda", "Justin", "Pamela", "Scott", "Nicole", "Brandon", "Emma",
    "Benjamin", "Samantha", "Samuel", "Katherine", "Gregory", "Christine", "Frank", "Debra",
    "Alexander", "Rachel", "Raymond", "Catherine", "Patrick", "Carolyn", "Jack", "Janet",
    "Dennis", "Ruth", "Jerry", "Maria", "Tyler", "Heather", "Aaron", "Diane", "Jose", "Virginia",
    "Adam", "Julie", "Henry", "Joyce", "Nathan", "Victoria", "Douglas", "Olivia", "Zachary",
    "Kelly", "Peter", "Christina", "Kyle", "Lauren", "Walter", "Joan", "Ethan", "Evelyn",
    "Jeremy", "Judith", "Harold", "Megan", "Keith", "Cheryl", "Christian", "Andrea", "Roger",
    "Hannah", "Noah", "Martha", "Gerald", "Jacqueline", "Carl", "Frances", "Terry", "Gloria",
    "Sean", "Ann", "Austin", "Teresa", "Arthur", "Kathryn", "Lawrence", "Sara", "Jesse",
    "Janice", "Dylan", "Jean", "Bryan", "Alice", "Joe", "Madison", "Jordan", "Doris", "Billy",
    "Abigail", "Bruce", "Julia", "Albert", "Judy", "Willie", "Grace", "Gabriel", "Denise",
    "Logan", "Amber", "Alan", "Marilyn", "Juan", "Beverly", "Wayne", "Danielle", "Roy",
    "Theresa", "Ralph", "Sophia", "Randy", "Marie", "Eugene", "Diana", "Vincent", "Brittany",
    "Russell", "Natalie", "Elijah", "Isabella", "Louis", "Charlotte", "Bobby", "Rose", "Philip",
    "Alexis", "Johnny", "Kayla",
];

pub const SURNAMES: &[&str] = &[
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis", "Rodriguez",
    "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Thomas", "Taylor",
    "Moore", "Jackson", "Martin", "Lee", "Perez", "Thompson", "White", "Harris", "Sanchez",
    "Clark", "Ramirez", "Lewis", "Robinson", "Walker", "Young", "Allen", "King", "Wright",
    "Scott", "Torres", "Nguyen", "Hill", "Flores", "Green", "Adams", "Nelson", "Baker", "Hall",
    "Rivera", "Campbell", "Mitchell", "Carter", "Roberts", "Gomez", "Phillips", "Evans",
    "Turner", "Diaz", "Parker", "Cruz", "Edwards", "Collins", "Reyes", "Stewart", "Morris",
    "Morales", "Murphy", "Cook", "Rogers", "Gutierrez", "Ortiz", "Morgan", "Cooper", "Peterson",
    "Bailey", "Reed", "Kelly", "Howard", "Ramos", "Kim", "Cox", "Ward", "Richardson", "Watson",
    "Brooks", "Chavez", "Wood", "James", "Bennett", "Gray", "Mendoza", "Ruiz", "Hughes", "Price",
    "Alvarez", "Castillo", "Sanders", "Patel", "Myers", "Long", "Ross", "Foster", "Jimenez",
    "Powell", "Jenkins", "Perry", "Russell", "Sullivan", "Bell", "Coleman", "Butler",
    "Henderson", "Barnes", "Gonzales", "Fisher", "Vasquez", "Simmons", "Romero", "Jordan",
    "Patterson", "Alexander", "Hamilton", "Graham", "Reynolds", "Griffin", "Wallace", "Moreno",
    "West", "Cole", "Hayes", "Bryant", "Herrera", "Gibson", "Ellis", "Tran", "Medina", "Aguilar",
    "Stevens", "Murray", "Ford", "Castro", "Marshall", "Owens", "Harrison", "Fernandez",
    "McDonald", "Woods", "Washington", "Kennedy", "Wells", "Vargas", "Henry", "Chen", "Freeman",
    "Webb", "Tucker", "Guzman", "Burns", "Crawford", "Olson", "Simpson", "Porter", "Hunter",
    "Gordon", "Mendez", "Silva", "Shaw", "Snyder", "Mason", "Dixon", "Munoz", "Hunt", "Hicks",
    "Holmes", "Palmer", "Wagner", "Black", "Robertson", "Boyd", "Rose", "Stone", "Salazar",
    "Fox", "Warren", "Mills", "Meyer", "Rice", "Schmidt", "Garza", "Daniels", "Ferguson",
    "Nichols", "Stephens", "Soto", "Weaver", "Ryan", "Gardner", "Payne", "Grant", "Dunn",
    "O'Brien", "MacLeod", "Lee-Chang", "Kelley", "Spencer", "Hawkins", "Arnold", "Pierce",
];

pub const STREET_NAMES: &[&str] = &[
    "Main", "Oak", "Pine", "Maple", "Cedar", "Elm", "Washington", "Lake", "Hill", "Walnut",
    "Spring", "North", "Ridge", "Church", "Willow", "Mill", "Sunset", "Railroad", "Jackson",
    "Cherry", "Highland", "Johnson", "Forest", "River", "Meadow", "Chestnut", "Franklin",
    "Center", "Adams", "Lincoln", "Madison", "Jefferson", "Hickory", "Dogwood", "Magnolia",
    "Sycamore", "Birch", "Lakeview", "Park", "Broad", "Market", "Water", "Union", "Prospect",
    "Laurel", "Poplar", "Valley", "Bridge", "Green", "Summit", "Harbor", "Orchard", "Heritage",
    "Westmoreland", "Fairview", "Holly", "Aspen", "Juniper", "Hawthorne", "Bayou", "Kingsley",
    "Sherwood", "Greenbriar", "Brookside", "Canterbury", "Wildwood", "Foxhall", "Quail",
];

pub const STREET_SUFFIXES: &[&str] = &[
    "Street", "Avenue", "Road", "Boulevard", "Drive", "Lane", "Court", "Place", "Terrace",
    "Way", "St", "Ave", "Rd", "Blvd", "Dr.", "St.", "Ave.", "Ln", "Ct", "Circle", "Parkway",
    "Trail", "Highway",
];

pub const EMAIL_DOMAINS: &[&str] = &[
    "gmail.com", "yahoo.com", "outlook.com", "hotmail.com", "aol.com", "icloud.com",
    "mail.com", "protonmail.com", "comcast.net", "verizon.net", "uth.edu", "example.org",
];

pub const URL_WORDS: &[&str] = &[
    "smithfamily", "mypage", "bloggers", "photoalbum", "runclub", "gardenlife", "techtalk",
    "cookbook", "travelnotes", "homestead", "fitjourney", "musicbox", "artcorner", "petlovers",
    "bookworms", "hikingtrails", "chessmaster", "knitters", "coffeebreak", "woodshop",
];

pub const TLDS: &[&str] = &["com", "org", "net", "info", "us", "io"];

pub const RACES: &[&str] = &[
    "White",
    "Black or African American",
    "Asian",
    "American Indian or Alaska Native",
    "Native Hawaiian or Other Pacific Islander",
    "Caucasian",
];

/// Relative frequencies shared by the text and integer-coded race columns.
pub const RACE_WEIGHTS: &[f64] = &[0.46, 0.24, 0.13, 0.08, 0.05, 0.04];

pub const ETHNICITIES: &[&str] = &["Hispanic or Latino", "Not Hispanic or Latino", "Hispanic", "Latina"];

/// Lowercase clinical vocabulary for non-identifying category columns.
/// None of these collide with address, age or demographic keywords.
pub const CLINICAL_WORDS: &[&str] = &[
    "stable", "improving", "worsening", "acute", "chronic", "mild", "moderate", "severe",
    "resolved", "pending", "negative", "positive", "normal", "abnormal", "elevated", "reduced",
    "inpatient", "outpatient", "emergency", "routine", "urgent", "oral", "intravenous",
    "topical", "daily", "weekly", "monthly", "fasting", "random", "admitted", "discharged",
    "transferred", "cardiology", "oncology", "neurology", "radiology", "pediatrics", "surgery",
    "dermatology", "nephrology", "orthopedics", "psychiatry", "hepatic", "renal", "pulmonary",
    "gastric", "cardiac", "vascular", "infection", "fracture", "anemia", "diabetes",
    "hypertension", "asthma", "migraine", "sepsis", "pneumonia", "arrhythmia", "obesity",
    "fatigue", "nausea", "cough", "fever", "rash", "edema", "syncope", "tremor", "seizure",
    "biopsy", "culture", "panel", "screen", "followup", "consult", "imaging", "therapy",
    "infusion", "dialysis", "bedside", "telemetry", "icu", "ward", "clinic", "pharmacy",
];
