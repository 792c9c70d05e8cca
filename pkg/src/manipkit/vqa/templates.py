"""Question template banks for the VQA factory.

Each family has a tuple of prompt templates; generation picks one with the
family RNG and fills the placeholders (`<TASK>`, `<SUBTASK>`, `<CHOICE>`,
`<TRACE>`, `{long-horizon}`, `{task n}`, `{task n-1}`, `{random task}`,
`{past task 1 ~ n-1}`, `<task 1>`..`<task 4>`, `<skill 1>`..`<skill 4>`).
Wording quirks inside the bank strings (spacing, dashes, dropped
apostrophes) are intentional and must not be edited, since tests match
emitted prompts against these literals fragment by fragment.
"""

import re

GRASP_POSE_CHOICE = (
    "The robot task is <TASK>. We provide some images that feature orange fork-like gripper patterns; these patterns stand for the potential poses the gripper needs to adopt to pick up an object. Which of the images below contains the correct grasping pose? The available choice is <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. Among the images we offer, there are orange fork-like gripper patterns—they represent the possible poses the gripper may use to grab an object. Which of the following images has the correct grasping pose? The available choice is <CHOICE>.Please select one option only.",
    "The robot task is <TASK>. We present some images with orange fork-like gripper patterns. These patterns correspond to the potential poses the gripper requires to pick up an object—so which image below contains the correct grasping pose? The available options are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. In the images we provide, there are orange fork-like gripper patterns: they represent the possible poses the gripper needs to use to pick up an object. Which of the following images contains the correct grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. We present some images annotated with orange fork-like gripper patterns. These patterns correspond to the potential poses the gripper may adopt to grab an object—so which image below has the right grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. We supply some images that include orange fork-like gripper patterns; these patterns represent the poses the gripper might need to take to pick up an object. Which of the images below contains the correct grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. Among the images we present, there are orange fork-like gripper patterns; they correspond to the potential poses the gripper needs to use to grab an object. Which image below has the correct grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. We offer some images featuring orange fork-like gripper patterns. These patterns stand for the poses the gripper might adopt to pick up an object—so which of the following images contains the correct grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. We provide some images that include orange fork-like gripper patterns; these patterns stand for the potential postures the gripper may use to grab an object. Which image below has the correct grasping pose? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>. The images we supply contain orange fork-like gripper patterns: these patterns represent the potential poses the gripper may rely on to grab an object. Which of the images below has the right grasping pose? The available choices are <CHOICE>. Please select one option only.",
)

GROUNDING_CHOICE = (
    "The robot task is <TASK>. We offer some images containing purple boxes, and these boxes correspond to the objects that maybe interact with the robotic arm, which image describe the right object bounding box? The available choice is [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. The images we present contain purple bounding boxes, which stand for the objects that the robotic arm maybe interacts with, which image depicts the correct object bounding box? The available choice is [<CHOICE>].Please select one option only.",
    "The robot task is <TASK>. Among the provided images, purple boxes are present to represent the objects that maybe engage with the robotic arm, which of the images shows the proper bounding box for the object? The available options are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. We offer some images where purple boxes are used to indicate the objects maybe interacting with the robotic arm, which image accurately describes the object's bounding box? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. We present a set of images with purple boxes, and these boxes represent the objects maybe involved in the robotic arm's interactions, which image contains the correct bounding box for the target object? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. We provide several images featuring purple boxes, which signify the objects that the robotic arm maybe interacts with, which image correctly illustrates the bounding box of the object? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. The images we provide include purple boxes that denote the objects maybe interacting with the robotic arm, which image accurately represents the bounding box of the object? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. We present images containing purple boxes, which indicate the objects that the robotic arm maybe interacts with, which image correctly shows the bounding box of the object? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. We provide images with purple boxes that represent the objects involved in the robotic arm's interactions, which image accurately depicts the bounding box of the object? The available choices are [<CHOICE>]. Please select one option only.",
    "The robot task is <TASK>. The images we present feature purple boxes that signify the objects interacting with the robotic arm, which image correctly illustrates the bounding box of the object? The available choices are [<CHOICE>]. Please select one option only.",
)

CONTACT_DECIDE = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, do you think the gripper has already made contact with the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, has the gripper made contact with the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, do you think the gripper has already touched the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, has the gripper touched the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, do you think the gripper has already reached the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, has the gripper reached the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, do you think the gripper has already approached the object? The available choices are [Yes, No]. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In this image, has the gripper approached the object? The available choices are [Yes, No]. Please select one option only.",
)

SCENE_UNDERSTANDING = (
    "Given four images labeled A, B, C, D, which image best corresponds to the scene required for accomplishing {long-horizon}? Please answer with a single option (A/B/C/D).",
    "Which of the images (A, B, C, D) best matches the scene necessary to achieve {long-horizon}? Please answer with a single option (A/B/C/D).",
    "Looking at the four images A, B, C, D, which one best represents the scene for {long-horizon}? Please answer with a single option (A/B/C/D).",
    "Among the four images (A, B, C, D) provided, which scene corresponds to {long-horizon}? Please answer with a single option (A/B/C/D).",
    "Which image (A, B, C, D) most accurately depicts the scene for {long-horizon}? Please answer with a single option (A/B/C/D).",
)

TRACE_CHOICE = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We provide some images that feature gradient-colored trajectories: green indicates the start of a trajectory, while red marks its end. These trajectories represent the possible paths the gripper needs to take to finish the subtask. Which image depicts the correct trajectory? The available choice is <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We offer a set of images containing gradient-colored trajectories. Green indicates the start of each trajectory, and red indicates its end—these trajectories represent the potential routes for the gripper to finish the subtask. Which image depicts the right trajectory? The available choice is <CHOICE>.Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. The images we supply include gradient-colored trajectories: green denotes the start of a trajectory, and red denotes its end. These trajectories stand for the paths the gripper might need to follow to accomplish the subtask. Which image has the correct trajectory? The available options are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We offer a set of images containing gradient-colored trajectories. Green indicates the start of each trajectory, and red indicates its end—these trajectories represent the potential routes for the gripper to finish the subtask. Which image depicts the right trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. In the images we provide, there are gradient-colored trajectories: green represents the start point of a trajectory, and red represents its end point. These trajectories correspond to the paths the gripper may need to take to complete the subtask. Which image shows the correct trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We supply some images that include gradient-colored trajectories—green stands for the beginning of a trajectory, and red for its end. These trajectories represent the potential paths the gripper needs to follow to finish the subtask. Which image has the right trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We provide some images with gradient-colored trajectories. Green represents the start of each trajectory, red represents its end, and these trajectories correspond to the paths the gripper needs to take to accomplish the subtask. Which image shows the right trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Among the images we present, gradient-colored trajectories are included—green stands for a trajectory's start, and red for its end. These trajectories represent the potential paths required for the gripper to finish the subtask. Which image has the correct trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We provide some images containing gradient-colored trajectories: green indicates the start of each trajectory, and red indicates its end. These trajectories are the possible paths the gripper may take to complete the subtask. Which image has the right trajectory? The available choices are <CHOICE>. Please select one option only.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. We present a set of images with gradient-colored trajectories—green marks where a trajectory begins, and red marks where it ends. These trajectories stand for the potential paths the gripper requires to accomplish the subtask. Which image shows the correct trajectory? The available choices are <CHOICE>. Please select one option only.",
)

TRACE_DIRECTION_CHOICE = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. There are some different color arrows around gripper on the image, which color most likely represents the actual move direction of the robot gripper? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. There are several arrows with different colors around the robot gripper on the image, which color describes the actual move direction of the robot gripper? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. On the image, different arrows surround the gripper—some near its jaws, others by the target part. Which color most likely shows the gripper's actual move direction? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Several colored arrows are around the robot gripper in the image; some point toward the box, others away. Which color describes the gripper's real move direction? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Different arrows are around the gripper in the image—upward and downward ones. Which color most likely represents its actual movement direction? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. On the image, various arrows surround the gripper—some point toward the box, others away. Which color most likely shows the gripper's actual move direction? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Several colored arrows are around the robot gripper in the image; some point up, others down. Which color describes its actual move direction? Please choose only one option from <CHOICE>.",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Several arrows with different colors are around the gripper; some are horizontal, others vertical. Which color describes its actual move direction? Please choose only one option from <CHOICE>.",
)

TRACE_LANGUAGE_CHOICE = (
    "You are performing <TASK>. Now we provide the image that feature gradient-colored trajectories: green indicates the start of a trajectory, while red marks its end. The trajectory represent the path the gripper needs to take to finish the subtask. Which subtask is the best match for the trajectory among the following options: <CHOICE>? Please select one option only.",
    "You are performing <TASK>. Below is an image showing gradient-colored trajectories, where green signifies the starting point and red indicates the endpoint. The trajectory illustrates the path the gripper should follow to complete the subtask. Among the options <CHOICE>, which subtask does the trajectory best correspond to? Please select one option only.",
    "You are performing <TASK>. The image below displays gradient-colored trajectories, with green representing the start and red the end. These trajectories depict the path the gripper must take to accomplish the subtask. From the choices <CHOICE>, which subtask aligns best with the trajectory? Please select one option only.",
    "You are performing <TASK>. The image provided shows gradient-colored trajectories, where green marks the beginning and red the conclusion. These trajectories outline the path the gripper needs to follow to complete the subtask. Which subtask from the options <CHOICE> does the trajectory best represent? Please select one option only.",
    "You are performing <TASK>. The image below features gradient-colored trajectories, with green indicating the start and red the end. These trajectories illustrate the path the gripper should take to accomplish the subtask. Among the choices <CHOICE>, which subtask does the trajectory best correspond to? Please select one option only.",
    "You are performing <TASK>. The image provided displays gradient-colored trajectories, where green signifies the starting point and red marks the endpoint. These trajectories depict the path the gripper must follow to complete the subtask. From the options <CHOICE>, which subtask aligns best with the trajectory? Please select one option only.",
    "You are performing <TASK>. Below is an image showing gradient-colored trajectories, with green representing the start and red the end. The trajectory illustrates the path the gripper needs to take to finish the subtask. Which subtask from the choices <CHOICE> does the trajectory best represent? Please select one option only.",
)

PLANNING_TASK = (
    "To advance toward {long-horizon}, what should be done next? Please answer in a short phrase.",
    "In order to fulfill {long-horizon}, what is the next best step? Please answer in a short phrase.",
    "Keeping {long-horizon} as the goal, what should be the next step to move forward? Please answer in a short phrase.",
    "To continue progressing toward {long-horizon}, what comes next? Please answer in a short phrase.",
    "Aiming for {long-horizon}, which step should you take now? Please answer in a short phrase.",
    "What should be the immediate next step to achieve {long-horizon}? Please answer in a short phrase.",
    "Considering {long-horizon} as the target, what task needs to be done next? Please answer in a short phrase.",
    "To move closer to {long-horizon}, what task should follow? Please answer in a short phrase.",
    "With {long-horizon} in mind, what is the most appropriate next action? Please answer in a short phrase.",
    "Toward achieving {long-horizon}, whats the next actionable task? Please answer in a short phrase.",
)

PLANNING_WITH_CONTEXT = (
    "Having accomplished {past task 1 ~ n-1}, what should be your next step to achieve {long-horizon}? Please answer in a short phrase.",
    "After completing {past task 1 ~ n-1}, what action will best advance you toward {long-horizon}? Please answer in a short phrase.",
    "With {past task 1 ~ n-1} done, what comes next to move closer to {long-horizon}? Please answer in a short phrase.",
    "Whats the next task to reach {long-horizon}, given that youve finished {past task 1 ~ n-1}? Please answer in a short phrase.",
    "Taking into account {past task 1 ~ n-1}, whats the best next move toward {long-horizon}? Please answer in a short phrase.",
    "With progress so far including {past task 1 ~ n-1}, what should you do next to achieve {long-horizon}? Please answer in a short phrase.",
    "Whats the next step in pursuit of {long-horizon}, after completing steps {past task 1 ~ n-1}? Please answer in a short phrase.",
    "So far, youve completed {past task 1 ~ n-1}. Whats the next logical step to reach {long-horizon}? Please answer in a short phrase.",
    "Whats the next action towards {long-horizon}, considering the completed tasks ({past task 1 ~ n-1})? Please answer in a short phrase.",
    "Given your progress ({past task 1 ~ n-1}), whats the most logical next step for achieving {long-horizon}? Please answer in a short phrase.",
)

PLANNING_REMAINING_STEPS = (
    "With {past task 1 ~ n-1} completed, what are the next five actions to reach {long-horizon}? Please answer in sequential phrases.",
    "What five steps should you take next to achieve {long-horizon}, after accomplishing {past task 1 ~ n-1}? Please answer in sequential phrases.",
    "Given that youve done {past task 1 ~ n-1}, what are the next five things to do for {long-horizon}? Please answer in sequential phrases.",
    "Having completed {past task 1 ~ n-1}, what five tasks will best advance you toward {long-horizon}? Please answer in sequential phrases.",
    "Considering the progress so far ({past task 1 ~ n-1}), what five steps should follow to accomplish {long-horizon}? Please answer in sequential phrases.",
    "After finishing {past task 1 ~ n-1}, what are the next five actions to take toward {long-horizon}? Please answer in sequential phrases.",
    "What are the next five tasks to complete after completing {past task 1 ~ n-1} to achieve {long-horizon}? Please answer in sequential phrases.",
    "Considering {long-horizon}, what are the next five logical steps after {past task 1 ~ n-1}? Please answer in sequential phrases.",
    "What are five actionable steps to follow {past task 1 ~ n-1} in achieving {long-horizon}? Please answer in sequential phrases.",
    "To move toward {long-horizon}, what are the next five key actions after {past task 1 ~ n-1}? Please answer in sequential phrases.",
)

GENERATIVE_AFFORDANCE = (
    "Whats the most practical action you can start immediately? Please answer in a short phrase.",
    "Considering the current state, what task can you begin right away? Please answer in a short phrase.",
    "Whats something you can work on right now? Please answer in a short phrase.",
    "At this point, what action can you take immediately? Please answer in a short phrase.",
    "Considering whats possible now, what should you do first? Please answer in a short phrase.",
    "Whats the best task to start immediately? Please answer in a short phrase.",
    "What action is most feasible to take at this moment? Please answer in a short phrase.",
    "Whats the next task you can focus on right now? Please answer in a short phrase.",
    "Whats the most available task to handle at present? Please answer in a short phrase.",
    "Given the situation, whats the best action to take right now? Please answer in a short phrase.",
)

FUTURE_PREDICTION = (
    "Once {task n-1} is complete, what is expected to happen next? Please answer in a short phrase.",
    "After {task n-1}, what development is likely to take place? Please answer in a short phrase.",
    "What is most likely to occur after {task n-1} finishes? Please answer in a short phrase.",
    "Given the tasks so far, what might follow {task n-1}? Please answer in a short phrase.",
    "Following the completion of {task n-1}, what is anticipated to happen? Please answer in a short phrase.",
    "What outcome is expected to follow {task n-1}? Please answer in a short phrase.",
    "Whats the likely result after completing {task n-1}? Please answer in a short phrase.",
    "Whats predicted to happen after {task n-1}? Please answer in a short phrase.",
    "After {task n-1}, whats the next event you anticipate? Please answer in a short phrase.",
    "Following {task n-1}, what is predicted to occur? Please answer in a short phrase.",
)

PAST_DESCRIPTION = (
    "What task was finished just now? Please answer in a short phrase.",
    "What did you complete most recently? Please answer in a short phrase.",
    "What was the last action you carried out? Please answer in a short phrase.",
    "Which task did you wrap up before this? Please answer in a short phrase.",
    "What was done immediately prior to this? Please answer in a short phrase.",
    "Which task was concluded most recently? Please answer in a short phrase.",
    "What was the previous action performed? Please answer in a short phrase.",
    "What task did you complete last? Please answer in a short phrase.",
    "What was the final task before now? Please answer in a short phrase.",
    "What action occurred just prior to this? Please answer in a short phrase.",
)

SUCCESS = (
    "Has {task n} been finished as intended? Please answer strictly with Yes or No.",
    "Is {task n} regarded as successfully completed? Please answer strictly with Yes or No.",
    "Is it confirmed that {task n} was done properly? Please answer strictly with Yes or No.",
    "Has {task n} been accomplished as expected? Please answer strictly with Yes or No.",
    "Can we confirm that {task n} was completed as required? Please answer strictly with Yes or No.",
    "Did {task n} achieve the desired results? Please answer strictly with Yes or No.",
    "Was {task n} executed successfully? Please answer strictly with Yes or No.",
    "Is {task n} considered a success? Please answer strictly with Yes or No.",
    "Can {task n} be marked as complete? Please answer strictly with Yes or No.",
    "Was {task n} carried out as planned? Please answer strictly with Yes or No.",
)

DISCRIMINATIVE_AFFORDANCE_POSITIVE = (
    "Is {task n} the task you should perform next? Please answer strictly with Yes or No.",
    "Are you expected to handle {task n} as the next step? Please answer strictly with Yes or No.",
    "Is {task n} the focus of your upcoming efforts? Please answer strictly with Yes or No.",
    "Is {task n} the next task to be addressed? Please answer strictly with Yes or No.",
    "Are you about to work on {task n} next? Please answer strictly with Yes or No.",
    "Is {task n} possible to start next? Please answer strictly with Yes or No.",
    "Can {task n} be executed in the next step? Please answer strictly with Yes or No.",
    "Is it realistic to begin {task n} in the following step? Please answer strictly with Yes or No.",
    "Is {task n} achievable as the next stage? Please answer strictly with Yes or No.",
    "Can you take up {task n} immediately after the current task? Please answer strictly with Yes or No.",
)

DISCRIMINATIVE_AFFORDANCE_NEGATIVE = (
    "Is {random task} the task you should perform next? Please answer strictly with Yes or No.",
    "Are you expected to handle {random task} as the next step? Please answer strictly with Yes or No.",
    "Is {random task} the focus of your upcoming efforts? Please answer strictly with Yes or No.",
    "Is {random task} the next task to be addressed? Please answer strictly with Yes or No.",
    "Are you about to work on {random task} next? Please answer strictly with Yes or No.",
    "Is {random task} possible to start next? Please answer strictly with Yes or No.",
    "Can {random task} be executed in the next step? Please answer strictly with Yes or No.",
    "Is it realistic to begin {random task} in the following step? Please answer strictly with Yes or No.",
    "Is {random task} achievable as the next stage? Please answer strictly with Yes or No.",
    "Can you take up {random task} immediately after the current task? Please answer strictly with Yes or No.",
)

PAST_MULTITASK_SELECTION = (
    "For {long-horizon}, which of the following subtasks has already been completed? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "In the context of {long-horizon}, which subtask has been finished so far? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "Regarding {long-horizon}, which subtask among the following has already been accomplished? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "To achieve {long-horizon}, which subtask has just been completed? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "Which of the listed subtasks has already been executed for {long-horizon}? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
)

FUTURE_MULTITASK_SELECTION = (
    "For achieving {long-horizon}, which subtask is the most appropriate to execute next? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "In order to complete {long-horizon}, which subtask should be executed next? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "Which subtask should be the next step toward {long-horizon}? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "Looking ahead to {long-horizon}, which subtask should be performed next? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
    "For progressing toward {long-horizon}, which subtask is the most suitable next step? \nChoices: [A. <task 1>, B. <task 2>, C. <task 3>, D. <task 4>].",
)

TEMPORAL_UNDERSTANDING = (
    "Given four images labeled A, B, C, and D, which image corresponds to the state while executing {task n}? Please answer with a single option (A/B/C/D).",
    "Which of the four images (A, B, C, D) shows the state during the execution of {task n}? Please answer with a single option (A/B/C/D).",
    "Looking at the four images, which one depicts the state when {task n} is being carried out? Please answer with a single option (A/B/C/D).",
    "Among images A, B, C, and D, which represents the state while performing {task n}? Please answer with a single option (A/B/C/D).",
    "Which image (A, B, C, D) corresponds to the state during the execution of {task n}? Please answer with a single option (A/B/C/D).",
)

PAST_PRIMITIVE_SELECTION = (
    "Which primitive skill has just been applied to achieve {long-horizon}? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "In pursuit of {long-horizon}, which primitive skill was applied most recently? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "Which skill was just executed for the purpose of {long-horizon}? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "For achieving {long-horizon}, which primitive was applied last? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "Which primitive skill had just been used in the process of {long-horizon}? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
)

FUTURE_PRIMITIVE_SELECTION = (
    "Which primitive skill should be applied next to achieve {long-horizon}? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "For {long-horizon}, which primitive skill is the most suitable to apply next? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "In order to accomplish {long-horizon}, which skill should be applied next? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "Looking ahead to {long-horizon}, which primitive should be chosen next? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
    "Which of the following skills should be applied as the next step for {long-horizon}? \nChoices: [A. <skill 1>, B. <skill 2>, C. <skill 3>, D. <skill 4>].",
)

# The generation-only families below have no published question bank, so these
# variants follow the same phrasing conventions as the banks above.
OBJECT_GROUNDING_GEN = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Please provide the bounding box of the object the robotic arm should interact with, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Locate the object that the gripper needs to interact with and answer with its bounding box [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Where is the target object in this image? Please answer with a bounding box in the form [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Give the bounding box of the task-relevant object, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Identify the object involved in this subtask and report its bounding box as [x1,y1,x2,y2].",
)

GRASP_AFFORDANCE_BOX = (
    "The robot task is <TASK>. Where should the gripper grasp the object in this image? Please answer with a bounding box of the grasp region, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>. Provide the region where the gripper should make contact to grasp the object, as a bounding box [x1,y1,x2,y2].",
    "The robot task is <TASK>. Which region of the image affords a stable grasp? Please answer with a bounding box in the form [x1,y1,x2,y2].",
    "The robot task is <TASK>. Give the grasp affordance of the object as a bounding box, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>. Report the area the gripper should close on to pick up the object, as a bounding box [x1,y1,x2,y2].",
)

GRASP_AFFORDANCE_KEYPOINT = (
    "The robot task is <TASK>. Where should the gripper grasp the object in this image? Please answer with a single point, formatted as [u,v].",
    "The robot task is <TASK>. Provide the point where the gripper should make contact to grasp the object, formatted as [u,v].",
    "The robot task is <TASK>. Which pixel location affords a stable grasp? Please answer with a single point in the form [u,v].",
    "The robot task is <TASK>. Give the grasp affordance of the object as one key point, formatted as [u,v].",
    "The robot task is <TASK>. Report the location the gripper should close on to pick up the object, as a point [u,v].",
)

GRIPPER_DETECTION = (
    "The robot task is <TASK>. Please provide the bounding box of the robot gripper in this image, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>. Locate the robot gripper and answer with its bounding box [x1,y1,x2,y2].",
    "The robot task is <TASK>. Where is the gripper in this image? Please answer with a bounding box in the form [x1,y1,x2,y2].",
    "The robot task is <TASK>. Give the bounding box of the end effector, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>. Detect the gripper of the robotic arm and report its bounding box as [x1,y1,x2,y2].",
)

PLACE_AFFORDANCE = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Where should the object be placed? Please answer with a bounding box of the placement region, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Provide the region where the object should be put down, as a bounding box [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Which region of the image is the proper place for the object? Please answer with a bounding box in the form [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Give the placement affordance for the object as a bounding box, formatted as [x1,y1,x2,y2].",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Report the area where the object should end up, as a bounding box [x1,y1,x2,y2].",
)

TRACE_EASY = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. The gripper has already moved along the waypoints <TRACE>. Please complete the 2D trajectory it should follow to finish the subtask, as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Given the initial waypoints <TRACE>, provide the remaining 2D trajectory of the gripper as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. The trajectory so far is <TRACE>. What are the remaining waypoints to finish the subtask? Please answer as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Starting from the given waypoints <TRACE>, continue the gripper trajectory to the end of the subtask as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. The gripper began along <TRACE>. Please predict the rest of its 2D path as a sequence of points formatted u,v;u,v;...",
)

TRACE_HARD = (
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Please provide the 2D trajectory the gripper should follow to finish the subtask, as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Predict the full 2D path of the gripper for this subtask as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. What trajectory should the gripper take to complete the subtask? Please answer as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Give the gripper trajectory for this subtask from start to end, as a sequence of points formatted u,v;u,v;...",
    "The robot task is <TASK>, and now you are performing subtask <SUBTASK>. Report the sequence of 2D waypoints the gripper needs to pass through for this subtask, formatted u,v;u,v;...",
)

BANKS: dict[str, tuple[str, ...]] = {
    "grasp_pose_choice": GRASP_POSE_CHOICE,
    "grounding_choice": GROUNDING_CHOICE,
    "contact_decide": CONTACT_DECIDE,
    "scene_understanding": SCENE_UNDERSTANDING,
    "object_grounding_gen": OBJECT_GROUNDING_GEN,
    "grasp_affordance_box": GRASP_AFFORDANCE_BOX,
    "grasp_affordance_keypoint": GRASP_AFFORDANCE_KEYPOINT,
    "gripper_detection": GRIPPER_DETECTION,
    "place_affordance": PLACE_AFFORDANCE,
    "trace_choice": TRACE_CHOICE,
    "trace_direction_choice": TRACE_DIRECTION_CHOICE,
    "trace_language_choice": TRACE_LANGUAGE_CHOICE,
    "past_multitask_selection": PAST_MULTITASK_SELECTION,
    "future_multitask_selection": FUTURE_MULTITASK_SELECTION,
    "past_primitive_selection": PAST_PRIMITIVE_SELECTION,
    "future_primitive_selection": FUTURE_PRIMITIVE_SELECTION,
    "temporal_understanding": TEMPORAL_UNDERSTANDING,
    "success_positive": SUCCESS,
    "success_negative": SUCCESS,
    "discriminative_affordance_positive": DISCRIMINATIVE_AFFORDANCE_POSITIVE,
    "discriminative_affordance_negative": DISCRIMINATIVE_AFFORDANCE_NEGATIVE,
    "trace_easy": TRACE_EASY,
    "trace_hard": TRACE_HARD,
    "planning_task": PLANNING_TASK,
    "planning_with_context": PLANNING_WITH_CONTEXT,
    "planning_remaining_steps": PLANNING_REMAINING_STEPS,
    "generative_affordance": GENERATIVE_AFFORDANCE,
    "future_prediction": FUTURE_PREDICTION,
    "past_description": PAST_DESCRIPTION,
}

PLACEHOLDER_RE = re.compile(
    r"<TASK>|<SUBTASK>|<CHOICE>|<TRACE>|<task [1-4]>|<skill [1-4]>"
    r"|\{long-horizon\}|\{task n-1\}|\{task n\}|\{random task\}|\{past task 1 ~ n-1\}"
)


def template_fragments(template: str) -> tuple[str, ...]:
    """Literal pieces of a template, placeholders removed. Used for matching."""
    return tuple(piece for piece in PLACEHOLDER_RE.split(template) if piece)


def fill_placeholders(template: str, values: dict) -> str:
    """Substitute every placeholder in template from values; KeyError if one is missing."""
    return PLACEHOLDER_RE.sub(lambda m: values[m.group(0)], template)
